#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"

#include "cohex/explainer.hpp"
#include "cohex/rng.hpp"
#include "test_helpers.hpp"

using namespace cohex;
using namespace cohex::testutil;

namespace {

// Brute-force counterfactual oracle: scan a fine fixed-resolution grid for
// the closest class flip along each feature, independent of the
// implementation's grid layout.
double oracle_min_flip_delta(const BlackBoxModel& m, const Dataset& ctx,
                             const std::vector<double>& x, std::size_t f, double resolution) {
    int base = m.predict(x).predicted_class();
    double lo = ctx.meta[f].range_min, hi = ctx.meta[f].range_max;
    std::vector<double> z = x;
    double best = std::numeric_limits<double>::infinity();
    for (double v = lo; v <= hi + 1e-12; v += resolution) {
        z[f] = v;
        if (m.predict(z).predicted_class() != base)
            best = std::min(best, std::abs(v - x[f]));
    }
    return best;
}

// Independent Shapley oracle: explicit average over all d! permutations, with
// the same value function contract (absent features from each background row,
// averaged).
std::vector<double> oracle_shapley_permutations(const BlackBoxModel& m, const Dataset& ctx,
                                                const std::vector<double>& x) {
    const std::size_t d = x.size();
    int focus = m.task() == Task::Classification ? m.predict(x).predicted_class() : 0;
    auto value = [&](const std::vector<bool>& present) {
        double acc = 0.0;
        for (const auto& b : ctx.features) {
            std::vector<double> z(d);
            for (std::size_t f = 0; f < d; ++f) z[f] = present[f] ? x[f] : b[f];
            acc += m.predict(z).scalar(focus);
        }
        return acc / static_cast<double>(ctx.n_samples());
    };
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> phi(d, 0.0);
    double n_perms = 0.0;
    do {
        std::vector<bool> present(d, false);
        double prev = value(present);
        for (int f : perm) {
            present[static_cast<std::size_t>(f)] = true;
            double cur = value(present);
            phi[static_cast<std::size_t>(f)] += cur - prev;
            prev = cur;
        }
        n_perms += 1.0;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (double& v : phi) v /= n_perms;
    return phi;
}

Dataset unit_square_context() {
    return make_dataset({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, 0.5}});
}

}  // namespace

TEST_CASE("counterfactual importance on a 1-D threshold model") {
    LambdaModel m([](const std::vector<double>& x) { return binary_class(x[0] >= 0.5 ? 1 : 0); },
                  Task::Classification, 2);
    Dataset ctx = make_dataset({{0.0}, {1.0}, {0.3}, {0.7}});
    ExplainerConfig cfg;

    SUBCASE("delta and importance match the analytic values") {
        Importance imp = explain_counterfactual(m, ctx, {0.3}, cfg);
        CHECK(imp.scores[0] == doctest::Approx(0.8).epsilon(1e-12));
        double oracle = oracle_min_flip_delta(m, ctx, {0.3}, 0, 1e-3);
        CHECK(std::abs((1.0 - oracle) - imp.scores[0]) <= 5e-3);
    }
    SUBCASE("a sample on the boundary has importance near 1") {
        Importance imp = explain_counterfactual(m, ctx, {0.5}, cfg);
        CHECK(imp.scores[0] >= 0.99);
    }
}

TEST_CASE("counterfactual ignores features the model ignores") {
    LambdaModel m([](const std::vector<double>& x) { return binary_class(x[0] >= 0.5 ? 1 : 0); },
                  Task::Classification, 2);
    Dataset ctx = unit_square_context();
    ExplainerConfig cfg;
    Importance imp = explain_counterfactual(m, ctx, {0.3, 0.4}, cfg);
    CHECK(imp.scores[1] == 0.0);
    CHECK(imp.scores[0] > 0.0);
}

TEST_CASE("counterfactual scores stay in [0, 1] and zero-width ranges are safe") {
    LambdaModel m([](const std::vector<double>& x) {
        return binary_class(x[0] + x[1] >= 1.0 ? 1 : 0);
    }, Task::Classification, 2);
    Dataset ctx = make_dataset({{0.2, 0.5}, {0.9, 0.5}});  // feature 1 constant
    ExplainerConfig cfg;
    Rng rng(4);
    for (int i = 0; i < 20; ++i) {
        std::vector<double> x = {rng.uniform(), 0.5};
        Importance imp = explain_counterfactual(m, ctx, x, cfg);
        for (double s : imp.scores) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
        CHECK(imp.scores[1] == 0.0);
    }
}

TEST_CASE("counterfactual regression uses the output-shift threshold") {
    LambdaModel m([](const std::vector<double>& x) { return regression_value(4.0 * x[0]); },
                  Task::Regression, 0);
    Dataset ctx = make_dataset({{0.0}, {0.25}, {0.5}, {0.75}, {1.0}});
    ExplainerConfig cfg;
    Importance imp = explain_counterfactual(m, ctx, {0.5}, cfg);
    CHECK(imp.scores[0] > 0.5);  // small move shifts the output past half a stddev

    LambdaModel constant([](const std::vector<double>&) { return regression_value(2.0); },
                         Task::Regression, 0);
    Importance zero = explain_counterfactual(constant, ctx, {0.5}, cfg);
    CHECK(zero.scores[0] == 0.0);
}

TEST_CASE("linear surrogate recovers relative coefficients of a linear model") {
    LambdaModel m([](const std::vector<double>& x) {
        return regression_value(2.0 * x[0] + 0.0 * x[1]);
    }, Task::Regression, 0);
    Dataset ctx = unit_square_context();
    ExplainerConfig cfg;
    cfg.method = ExplainerMethod::LinearSurrogate;
    cfg.n_perturbations = 100000;
    cfg.kernel_width = 1.0;
    cfg.seed = 17;
    Importance imp = explain_linear_surrogate(m, ctx, {0.5, 0.5}, cfg);
    double top = *std::max_element(imp.scores.begin(), imp.scores.end());
    CHECK(imp.scores[0] / top == doctest::Approx(1.0));
    CHECK(imp.scores[1] / top <= 0.05);
}

TEST_CASE("linear surrogate on a constant model finds nothing") {
    LambdaModel m([](const std::vector<double>&) { return regression_value(3.0); },
                  Task::Regression, 0);
    Dataset ctx = unit_square_context();
    ExplainerConfig cfg;
    cfg.n_perturbations = 500;
    cfg.seed = 5;
    Importance imp = explain_linear_surrogate(m, ctx, {0.5, 0.5}, cfg);
    for (double s : imp.scores) CHECK(s <= 1e-6);
}

TEST_CASE("linear surrogate is deterministic under a fixed seed") {
    LambdaModel m([](const std::vector<double>& x) {
        return regression_value(x[0] * x[0] - x[1]);
    }, Task::Regression, 0);
    Dataset ctx = unit_square_context();
    ExplainerConfig cfg;
    cfg.n_perturbations = 300;
    cfg.seed = 123;
    Importance a = explain_linear_surrogate(m, ctx, {0.4, 0.6}, cfg);
    Importance b = explain_linear_surrogate(m, ctx, {0.4, 0.6}, cfg);
    CHECK(a.scores == b.scores);
}

TEST_CASE("linear surrogate enforces its sample-count precondition") {
    LambdaModel m([](const std::vector<double>& x) { return regression_value(x[0]); },
                  Task::Regression, 0);
    Dataset ctx = unit_square_context();
    ExplainerConfig cfg;
    cfg.n_perturbations = 2;  // needs >= d + 1 = 3
    CHECK_THROWS(explain_linear_surrogate(m, ctx, {0.5, 0.5}, cfg));
}

TEST_CASE("exact shapley on an additive model returns the summands") {
    LambdaModel m([](const std::vector<double>& x) { return regression_value(x[0] + x[1]); },
                  Task::Regression, 0);
    Dataset ctx = make_dataset({{0.0, 0.0}});  // background mean (0, 0)
    ExplainerConfig cfg;
    Importance imp = explain_shapley(m, ctx, {3.0, 5.0}, cfg);
    CHECK(imp.scores[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(imp.scores[1] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("exact shapley satisfies efficiency") {
    PatientGenConfig pg;
    pg.n = 40;
    pg.seed = 6;
    Dataset ds = generate_patients(pg);
    auto m = train_cart(ds, 2);
    Dataset ctx = subset(ds, {0, 1, 2, 3, 4, 5, 6, 7});
    ExplainerConfig cfg;
    for (int i = 0; i < 5; ++i) {
        const auto& x = ds.features[static_cast<std::size_t>(i)];
        Importance imp = explain_shapley(*m, ctx, x, cfg);
        int focus = m->predict(x).predicted_class();
        double vx = m->predict(x).scalar(focus);
        double vbar = 0.0;
        for (const auto& b : ctx.features) vbar += m->predict(b).scalar(focus);
        vbar /= static_cast<double>(ctx.n_samples());
        double total = std::accumulate(imp.scores.begin(), imp.scores.end(), 0.0);
        CHECK(std::abs(total - (vx - vbar)) <= 1e-9);
    }
}

TEST_CASE("exact shapley matches the permutation-enumeration oracle on a cart") {
    // 3-feature classification tree; oracle enumerates all 3! permutations
    Dataset train = make_dataset(
        {{0.1, 0.9, 0.2}, {0.4, 0.1, 0.8}, {0.6, 0.5, 0.1}, {0.9, 0.3, 0.7},
         {0.2, 0.6, 0.5}, {0.7, 0.8, 0.9}, {0.3, 0.2, 0.3}, {0.8, 0.7, 0.4}},
        {0, 0, 1, 1, 0, 1, 0, 1}, LabelKind::ClassIndex, 2);
    auto m = train_cart(train, 3);
    Dataset ctx = subset(train, {0, 2, 4, 6});
    ExplainerConfig cfg;
    for (std::size_t i = 0; i < train.n_samples(); ++i) {
        Importance imp = explain_shapley(*m, ctx, train.features[i], cfg);
        std::vector<double> oracle = oracle_shapley_permutations(*m, ctx, train.features[i]);
        for (std::size_t f = 0; f < 3; ++f)
            CHECK(std::abs(imp.scores[f] - oracle[f]) <= 1e-9);
    }
}

TEST_CASE("exact shapley is symmetric for symmetric features") {
    LambdaModel m([](const std::vector<double>& x) { return regression_value(x[0] + x[1]); },
                  Task::Regression, 0);
    Dataset ctx = make_dataset({{0.2, 0.2}, {0.8, 0.8}});
    ExplainerConfig cfg;
    Importance imp = explain_shapley(m, ctx, {0.6, 0.6}, cfg);
    CHECK(imp.scores[0] == doctest::Approx(imp.scores[1]).epsilon(1e-12));
}

TEST_CASE("sampled shapley stays close to exact above the threshold") {
    LambdaModel m([](const std::vector<double>& x) {
        return regression_value(2.0 * x[0] - x[1] + 0.5 * x[2]);
    }, Task::Regression, 0);
    Dataset ctx = make_dataset({{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}});
    ExplainerConfig cfg;
    cfg.exact_shapley_threshold = 0;  // force sampling
    cfg.shapley_samples = 2000;
    cfg.seed = 11;
    Importance sampled = explain_shapley(m, ctx, {1.0, 1.0, 1.0}, cfg);
    // for a linear model the exact values are the coefficient * (x - mean)
    CHECK(sampled.scores[0] == doctest::Approx(2.0 * 0.5).epsilon(0.05));
    CHECK(sampled.scores[1] == doctest::Approx(-0.5).epsilon(0.05));
}

TEST_CASE("explainers are invariant to context sample order") {
    PatientGenConfig pg;
    pg.n = 16;
    pg.seed = 14;
    Dataset ds = generate_patients(pg);
    auto m = train_cart(ds, 2);
    std::vector<int> fwd(16), rev(16);
    std::iota(fwd.begin(), fwd.end(), 0);
    rev = fwd;
    std::reverse(rev.begin(), rev.end());
    Dataset ctx_a = subset(ds, fwd);
    Dataset ctx_b = subset(ds, rev);

    for (auto method : {ExplainerMethod::Counterfactual, ExplainerMethod::LinearSurrogate,
                        ExplainerMethod::Shapley}) {
        ExplainerConfig cfg;
        cfg.method = method;
        cfg.n_perturbations = 200;
        cfg.seed = 3;
        Importance a = explain(*m, ctx_a, ds.features[3], cfg);
        Importance b = explain(*m, ctx_b, ds.features[3], cfg);
        for (std::size_t f = 0; f < a.scores.size(); ++f)
            CHECK(a.scores[f] == doctest::Approx(b.scores[f]).epsilon(1e-12));
    }
}

TEST_CASE("gale re-weighting") {
    auto imp = [](double a, double b) {
        Importance i;
        i.scores = {a, b};
        return i;
    };
    SUBCASE("equal homogeneity leaves scores unchanged") {
        // both features perfectly concentrated on one class each
        std::vector<Importance> imps = {imp(1.0, 0.0), imp(0.0, 1.0)};
        std::vector<int> preds = {0, 1};
        auto out = gale_reweight(imps, preds);
        CHECK(out[0].scores == imps[0].scores);
        CHECK(out[1].scores == imps[1].scores);
    }
    SUBCASE("the least homogeneous feature is zeroed") {
        // feature 0 concentrated on class 0; feature 1 spread evenly
        std::vector<Importance> imps = {imp(1.0, 0.5), imp(0.0, 0.5)};
        std::vector<int> preds = {0, 1};
        auto out = gale_reweight(imps, preds);
        CHECK(out[0].scores[1] == 0.0);
        CHECK(out[1].scores[1] == 0.0);
        CHECK(out[0].scores[0] == doctest::Approx(1.0));
    }
    SUBCASE("all-zero importances stay zero") {
        std::vector<Importance> imps = {imp(0.0, 0.0), imp(0.0, 0.0)};
        std::vector<int> preds = {0, 1};
        auto out = gale_reweight(imps, preds);
        for (const auto& o : out)
            for (double s : o.scores) CHECK(s == 0.0);
    }
    SUBCASE("single-class predictions give unit weights") {
        std::vector<Importance> imps = {imp(0.3, 0.9), imp(0.1, 0.2)};
        std::vector<int> preds = {1, 1};
        auto w = gale_weights(imps, preds);
        CHECK(w == std::vector<double>{1.0, 1.0});
    }
}
