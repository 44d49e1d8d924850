#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "cohex/dataset.hpp"
#include "cohex/report.hpp"

using namespace cohex;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    out.close();
    return path.string();
}

}  // namespace

TEST_CASE("load_csv parses a small numeric file") {
    auto path = write_temp_csv("basic.csv",
                               "age,family,label\n"
                               "10,0.5,0\n"
                               "40,0.1,1\n"
                               "70,0.9,1\n");
    Dataset ds = load_csv(path, "label");
    CHECK(ds.n_samples() == 3);
    CHECK(ds.n_features() == 2);
    CHECK(ds.label_kind == LabelKind::ClassIndex);
    CHECK(ds.n_classes == 2);
    CHECK(ds.labels == std::vector<double>{0, 1, 1});
    CHECK(ds.meta[0].name == "age");
    CHECK(ds.meta[0].range_min == doctest::Approx(10.0));
    CHECK(ds.meta[0].range_max == doctest::Approx(70.0));
}

TEST_CASE("load_csv one-hot encodes categorical columns") {
    auto path = write_temp_csv("cat.csv",
                               "city,x,label\n"
                               "b,1,0\n"
                               "a,2,1\n"
                               "c,3,0\n"
                               "a,4,1\n");
    Dataset ds = load_csv(path, "label", {"city"});
    CHECK(ds.n_features() == 4);  // 3 one-hot + x
    CHECK(ds.meta[0].name == "city=a");
    CHECK(ds.meta[1].name == "city=b");
    CHECK(ds.meta[2].name == "city=c");
    CHECK(ds.features[0] == std::vector<double>{0, 1, 0, 1});
    CHECK(ds.features[1] == std::vector<double>{1, 0, 0, 2});
}

TEST_CASE("load_csv gives constant columns stddev 1") {
    auto path = write_temp_csv("const.csv",
                               "a,b,label\n"
                               "5,1,0\n"
                               "5,2,1\n");
    Dataset ds = load_csv(path, "label");
    CHECK(ds.scaling.stddev[0] == 1.0);
    CHECK(ds.scaling.stddev[1] == doctest::Approx(0.5));
}

TEST_CASE("load_csv error paths") {
    CHECK_THROWS(load_csv("/nonexistent/file.csv", "label"));
    auto empty = write_temp_csv("empty.csv", "");
    CHECK_THROWS(load_csv(empty, "label"));
    auto header_only = write_temp_csv("header.csv", "a,label\n");
    CHECK_THROWS(load_csv(header_only, "label"));
    auto bad = write_temp_csv("bad.csv", "a,label\nx,1\n");
    CHECK_THROWS(load_csv(bad, "label"));
    auto ok = write_temp_csv("ok.csv", "a,label\n1,1\n");
    CHECK_THROWS(load_csv(ok, "missing"));
}

TEST_CASE("generate_patients matches the analytic age expectation") {
    PatientGenConfig cfg;
    cfg.n = 10000;
    cfg.seed = 42;
    Dataset ds = generate_patients(cfg);
    double sum = 0.0, sum2 = 0.0;
    for (const auto& row : ds.features) {
        sum += row[0];
        sum2 += row[0] * row[0];
    }
    double n = static_cast<double>(cfg.n);
    double mean = sum / n;
    double sd = std::sqrt(sum2 / n - mean * mean);
    double se = sd / std::sqrt(n);
    // E[A] = 10 * E[decade] + 5 = 36.2
    CHECK(std::abs(mean - 36.2) <= 3.0 * se);
}

TEST_CASE("generate_patients label noise matches the flip rate") {
    PatientGenConfig cfg;
    cfg.n = 100000;
    cfg.seed = 7;
    Dataset ds = generate_patients(cfg);
    double above = 0.0, above_pos = 0.0;
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        if (patient_risk_score(ds.features[i][0], ds.features[i][1]) >= 0.4) {
            above += 1.0;
            above_pos += ds.labels[i];
        }
    }
    REQUIRE(above > 1000);
    double frac = above_pos / above;
    double se = std::sqrt(0.8 * 0.2 / above);
    CHECK(std::abs(frac - 0.8) <= 4.0 * se);
}

TEST_CASE("generate_patients with flip_prob 0 gives noiseless labels") {
    PatientGenConfig cfg;
    cfg.n = 500;
    cfg.seed = 3;
    cfg.flip_prob = 0.0;
    Dataset ds = generate_patients(cfg);
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        int expected = patient_risk_score(ds.features[i][0], ds.features[i][1]) >= 0.4 ? 1 : 0;
        CHECK(ds.labels[i] == expected);
    }
}

TEST_CASE("generate_patients is deterministic and in range") {
    PatientGenConfig cfg;
    cfg.n = 1000;
    cfg.seed = 11;
    Dataset a = generate_patients(cfg);
    Dataset b = generate_patients(cfg);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    for (std::size_t i = 0; i < a.n_samples(); ++i) {
        CHECK(a.features[i][0] >= 0.0);
        CHECK(a.features[i][0] < 100.0);
        CHECK(a.features[i][1] >= 0.0);
        CHECK(a.features[i][1] < 1.0);
        CHECK((a.labels[i] == 0.0 || a.labels[i] == 1.0));
    }
}

TEST_CASE("generate_patients decade marginal is close to the target") {
    PatientGenConfig cfg;
    cfg.n = 100000;
    cfg.seed = 123;
    Dataset ds = generate_patients(cfg);
    std::vector<double> counts(10, 0.0);
    for (const auto& row : ds.features)
        counts[static_cast<std::size_t>(row[0] / 10.0)] += 1.0;
    const std::vector<double> target = {0.14, 0.15, 0.14, 0.15, 0.15,
                                        0.11, 0.07, 0.06, 0.02, 0.01};
    double tv = 0.0;
    for (std::size_t b = 0; b < 10; ++b)
        tv += std::abs(counts[b] / static_cast<double>(cfg.n) - target[b]);
    CHECK(tv / 2.0 <= 0.02);
}

TEST_CASE("standardized_distance") {
    SUBCASE("identical points") {
        Scaling s{{0.0}, {2.0}};
        CHECK(standardized_distance({3.0}, {3.0}, s) == 0.0);
    }
    SUBCASE("1-D with stddev 2") {
        Scaling s{{0.0}, {2.0}};
        CHECK(standardized_distance({2.0}, {-2.0}, s) == doctest::Approx(2.0));
    }
    SUBCASE("pythagorean with unit scale") {
        Scaling s{{0.0, 0.0}, {1.0, 1.0}};
        CHECK(standardized_distance({0.0, 0.0}, {3.0, 4.0}, s) == doctest::Approx(5.0));
    }
    SUBCASE("dimension mismatch throws") {
        Scaling s{{0.0}, {1.0}};
        CHECK_THROWS(standardized_distance({1.0, 2.0}, {0.0}, s));
    }
}

TEST_CASE("subset recomputes scaling and ranges") {
    PatientGenConfig cfg;
    cfg.n = 50;
    cfg.seed = 1;
    Dataset ds = generate_patients(cfg);
    Dataset sub = subset(ds, {0, 1, 2});
    CHECK(sub.n_samples() == 3);
    double lo = std::min({ds.features[0][0], ds.features[1][0], ds.features[2][0]});
    CHECK(sub.meta[0].range_min == doctest::Approx(lo));
    Dataset single = subset(ds, {5});
    CHECK(single.scaling.stddev[0] == 1.0);  // constant-column rule
}

TEST_CASE("dataset_to_csv round-trips through load_csv") {
    PatientGenConfig cfg;
    cfg.n = 20;
    cfg.seed = 9;
    Dataset ds = generate_patients(cfg);
    auto path = write_temp_csv("roundtrip.csv", dataset_to_csv(ds));
    Dataset back = load_csv(path, "label");
    CHECK(back.features == ds.features);
    CHECK(back.labels == ds.labels);
}
