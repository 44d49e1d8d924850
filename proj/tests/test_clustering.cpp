#include <cmath>
#include <numeric>

#include "doctest.h"

#include "cohex/clustering.hpp"
#include "cohex/rng.hpp"
#include "test_helpers.hpp"

using namespace cohex;
using namespace cohex::testutil;

namespace {

Importance imp(std::initializer_list<double> v) {
    Importance i;
    i.scores = v;
    return i;
}

// Exhaustive oracle: best objective over every non-empty subset of samples
// used as centroids.
double oracle_best_objective(const Dataset& ds, const std::vector<Importance>& w,
                             const ObjectiveParams& params) {
    const std::size_t n = ds.n_samples();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<int> cents;
        for (std::size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1u) cents.push_back(static_cast<int>(i));
        CohortAssignment asg = assign_from_samples(cents, ds);
        best = std::min(best, objective(w, asg, params, n));
    }
    return best;
}

}  // namespace

TEST_CASE("assign picks the nearest centroid with deterministic ties") {
    Dataset ds = make_dataset({{1.0, 2.0}, {9.0, 9.0}, {5.0, 5.0}});
    ds.scaling.mean = {0.0, 0.0};
    ds.scaling.stddev = {1.0, 1.0};

    SUBCASE("nearest wins") {
        auto asg = assign({{0.0, 0.0}, {10.0, 10.0}}, ds);
        CHECK(asg.assignment[0] == 0);
        CHECK(asg.assignment[1] == 1);
    }
    SUBCASE("equidistant point goes to the lower centroid index") {
        auto asg = assign({{4.0, 5.0}, {6.0, 5.0}}, ds);
        CHECK(asg.assignment[2] == 0);
    }
    SUBCASE("single centroid captures everything") {
        auto asg = assign({{0.0, 0.0}}, ds);
        CHECK(asg.n_cohorts == 1);
        for (int a : asg.assignment) CHECK(a == 0);
    }
    SUBCASE("empty cohorts are pruned") {
        auto asg = assign({{1.0, 2.0}, {100.0, 100.0}, {9.0, 9.0}}, ds);
        CHECK(asg.n_cohorts == 2);
        CHECK(asg.assignment == std::vector<int>{0, 1, 1});
    }
    SUBCASE("assign is idempotent") {
        auto asg = assign({{1.0, 2.0}, {9.0, 9.0}}, ds);
        auto again = assign(asg.centroids, ds);
        CHECK(again.assignment == asg.assignment);
    }
}

TEST_CASE("generalizability loss arithmetic") {
    SUBCASE("identical importances cost nothing") {
        CohortAssignment asg;
        asg.assignment = {0, 0, 1};
        asg.n_cohorts = 2;
        std::vector<Importance> w = {imp({1, 2}), imp({1, 2}), imp({1, 2})};
        CHECK(generalizability_loss(w, asg) == 0.0);
    }
    SUBCASE("one cohort with two orthogonal unit importances costs one half") {
        CohortAssignment asg;
        asg.assignment = {0, 0};
        asg.n_cohorts = 1;
        std::vector<Importance> w = {imp({1, 0}), imp({0, 1})};
        CHECK(generalizability_loss(w, asg) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("singleton cohorts cost nothing") {
        CohortAssignment asg;
        asg.assignment = {0, 1};
        asg.n_cohorts = 2;
        std::vector<Importance> w = {imp({1, 0}), imp({0, 1})};
        CHECK(generalizability_loss(w, asg) == 0.0);
    }
}

TEST_CASE("objective adds the conciseness penalty") {
    std::vector<Importance> w(100, imp({1.0}));
    CohortAssignment asg;
    asg.assignment.assign(100, 0);
    for (int i = 0; i < 100; ++i) asg.assignment[static_cast<std::size_t>(i)] = i % 6;
    asg.n_cohorts = 6;

    SUBCASE("k above k_star") {
        ObjectiveParams params{0.1, 4};
        CHECK(objective(w, asg, params, 100) ==
              doctest::Approx(0.1 * std::sqrt(0.02)).epsilon(1e-12));
    }
    SUBCASE("k at or below k_star costs nothing") {
        ObjectiveParams params{0.1, 6};
        CHECK(objective(w, asg, params, 100) == 0.0);
        params.k_star = 10;
        CHECK(objective(w, asg, params, 100) == 0.0);
    }
    SUBCASE("lambda zero reduces to the loss") {
        ObjectiveParams params{0.0, 1};
        CHECK(objective(w, asg, params, 100) == generalizability_loss(w, asg));
    }
}

TEST_CASE("sridhcr recovers two distant pairs") {
    Dataset ds = make_dataset({{0.0, 0.0}, {0.1, 0.0}, {10.0, 10.0}, {10.1, 10.0}});
    std::vector<Importance> w = {imp({1, 0}), imp({1, 0}), imp({0, 1}), imp({0, 1})};
    ObjectiveParams params{0.5, 2};
    SridhcrResult res = sridhcr(ds, w, params, 3, 3);
    CHECK(res.objective == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res.assignment.n_cohorts == 2);
    CHECK(res.assignment.assignment[0] == res.assignment.assignment[1]);
    CHECK(res.assignment.assignment[2] == res.assignment.assignment[3]);
    CHECK(res.assignment.assignment[0] != res.assignment.assignment[2]);
    CHECK(res.objective == doctest::Approx(oracle_best_objective(ds, w, params)).epsilon(1e-12));
}

TEST_CASE("sridhcr never worsens the initial assignment and descends monotonically") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<double>> rows;
        std::vector<Importance> w;
        int n = 5 + static_cast<int>(rng.uniform_index(4));
        for (int i = 0; i < n; ++i) {
            rows.push_back({rng.uniform(), rng.uniform()});
            w.push_back(imp({rng.uniform(), rng.uniform()}));
        }
        Dataset ds = make_dataset(rows);
        ObjectiveParams params{0.2, 2};
        SridhcrResult res = sridhcr(ds, w, params, static_cast<std::uint64_t>(trial), 2);
        for (const auto& [initial, final_obj] : res.restart_bounds)
            CHECK(final_obj <= initial + 1e-12);
        for (std::size_t i = 1; i < res.trace.size(); ++i)
            CHECK(res.trace[i] <= res.trace[i - 1] + 1e-12);
        CHECK(res.objective <= res.restart_bounds[0].first + 1e-12);
    }
}

TEST_CASE("sridhcr reaches zero loss when k_star covers every sample") {
    Dataset ds = make_dataset({{0.0}, {1.0}, {2.0}, {3.0}});
    std::vector<Importance> w = {imp({0.0}), imp({1.0}), imp({2.0}), imp({3.0})};
    ObjectiveParams params{0.0, 4};
    SridhcrResult res = sridhcr(ds, w, params, 5, 2);
    CHECK(res.objective == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sridhcr matches exhaustive search on most small instances") {
    Rng rng(2024);
    int hits = 0;
    const int instances = 30;
    for (int t = 0; t < instances; ++t) {
        int n = 4 + static_cast<int>(rng.uniform_index(5));  // 4..8
        std::vector<std::vector<double>> rows;
        std::vector<Importance> w;
        for (int i = 0; i < n; ++i) {
            rows.push_back({rng.uniform(), rng.uniform()});
            w.push_back(imp({rng.uniform(), rng.uniform()}));
        }
        Dataset ds = make_dataset(rows);
        ObjectiveParams params{rng.uniform() < 0.5 ? 0.0 : 0.1,
                               1 + static_cast<int>(rng.uniform_index(3))};
        SridhcrResult res = sridhcr(ds, w, params, static_cast<std::uint64_t>(t), 3);
        double oracle = oracle_best_objective(ds, w, params);
        CHECK(res.objective >= oracle - 1e-12);
        if (std::abs(res.objective - oracle) <= 1e-9) ++hits;
    }
    CHECK(hits >= instances * 8 / 10);
}

TEST_CASE("cohorts partition the dataset") {
    PatientGenConfig pg;
    pg.n = 60;
    pg.seed = 8;
    Dataset ds = generate_patients(pg);
    std::vector<Importance> w;
    Rng rng(1);
    for (std::size_t i = 0; i < ds.n_samples(); ++i) w.push_back(imp({rng.uniform()}));
    SridhcrResult res = sridhcr(ds, w, {0.5, 4}, 9, 2);
    auto members = res.assignment.members();
    std::size_t total = 0;
    for (const auto& m : members) {
        CHECK(!m.empty());
        total += m.size();
    }
    CHECK(total == ds.n_samples());
}
