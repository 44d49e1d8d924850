#include "cohex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cohex/parallel.hpp"
#include "cohex/rng.hpp"

namespace cohex {

double eval_generalizability(const CohortSolution& sol) {
    return generalizability_loss(sol.per_sample, sol.assignment);
}

namespace {

double sq_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

std::vector<double> label_pool(const Dataset& ds) {
    if (ds.has_labels() && !ds.labels.empty()) return ds.labels;
    return {0.0};  // unlabeled regression datasets cannot feed the random branch
}

std::pair<double, double> mean_and_stderr(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    double mean = sum / n;
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

Importance explain_cohort_step(const BlackBoxModel& model, const Dataset& ds,
                               const ExplainerConfig& explainer, const CohortSolution& sol,
                               int cohort) {
    auto members = sol.assignment.members()[static_cast<std::size_t>(cohort)];
    const std::size_t d = ds.n_features();

    std::vector<Importance> member_imps;
    if (sol.method == Method::Cohex) {
        Dataset context = subset(ds, members);
        for (int i : members)
            member_imps.push_back(
                explain(model, context, ds.features[static_cast<std::size_t>(i)], explainer));
    } else if (sol.gale) {
        // The baseline pipeline re-weights with statistics over the whole
        // dataset, so the full importance set is recomputed under this model.
        std::vector<Importance> all(ds.n_samples());
        std::vector<int> preds(ds.n_samples());
        for (std::size_t i = 0; i < ds.n_samples(); ++i) {
            all[i] = explain(model, ds, ds.features[i], explainer);
            preds[i] = model.predict(ds.features[i]).predicted_class();
        }
        all = gale_reweight(all, preds);
        for (int i : members) member_imps.push_back(all[static_cast<std::size_t>(i)]);
    } else {
        for (int i : members)
            member_imps.push_back(
                explain(model, ds, ds.features[static_cast<std::size_t>(i)], explainer));
    }

    Importance mean;
    mean.scores.assign(d, 0.0);
    for (const auto& imp : member_imps)
        for (std::size_t f = 0; f < d; ++f) mean.scores[f] += imp.scores[f];
    for (std::size_t f = 0; f < d; ++f) mean.scores[f] /= static_cast<double>(member_imps.size());
    return mean;
}

std::vector<LocalityPoint> eval_locality(const BlackBoxModel& model, const Dataset& ds,
                                         const ExplainerConfig& explainer,
                                         const CohortSolution& sol,
                                         const std::vector<double>& p_grid, int repeats,
                                         std::uint64_t seed, int threads) {
    if (repeats < 2) throw std::invalid_argument("eval_locality: repeats must be >= 2");
    if (p_grid.empty()) throw std::invalid_argument("eval_locality: empty p grid");
    const int k = static_cast<int>(sol.n_cohorts());
    const std::vector<double> pool = label_pool(ds);

    // model must be shareable by the randomized wrappers
    struct NonOwning : BlackBoxModel {
        const BlackBoxModel* inner;
        explicit NonOwning(const BlackBoxModel* m) : inner(m) {}
        Prediction predict(const std::vector<double>& x) const override {
            return inner->predict(x);
        }
        Task task() const override { return inner->task(); }
        int n_classes() const override { return inner->n_classes(); }
    };
    auto base = std::make_shared<NonOwning>(&model);

    const int cells = static_cast<int>(p_grid.size()) * repeats;
    std::vector<double> cell_value(static_cast<std::size_t>(cells), 0.0);
    parallel_for(cells, threads, [&](int cell) {
        const int pi = cell / repeats;
        const int r = cell % repeats;
        const double p = p_grid[static_cast<std::size_t>(pi)];
        double total = 0.0;
        for (int j = 0; j < k; ++j) {
            auto randomized = make_randomized(
                base, sol.regions, j, p, pool,
                seed_combine({seed, double_bits(p), static_cast<std::uint64_t>(r),
                              static_cast<std::uint64_t>(j)}));
            Importance shifted = explain_cohort_step(*randomized, ds, explainer, sol, j);
            total += sq_norm_diff(sol.explanations[static_cast<std::size_t>(j)].scores,
                                  shifted.scores);
        }
        cell_value[static_cast<std::size_t>(cell)] = total;
    });

    std::vector<LocalityPoint> out;
    for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
        std::vector<double> values(cell_value.begin() + static_cast<std::ptrdiff_t>(pi) * repeats,
                                   cell_value.begin() +
                                       static_cast<std::ptrdiff_t>(pi + 1) * repeats);
        auto [mean, se] = mean_and_stderr(values);
        out.push_back({p_grid[pi], mean, se});
    }
    return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("adjusted_rand_index: length mismatch");
    const std::size_t n = a.size();
    if (n == 0) return 1.0;

    std::map<int, int> ra, rb;
    for (int x : a) ra.emplace(x, static_cast<int>(ra.size()));
    for (int x : b) rb.emplace(x, static_cast<int>(rb.size()));
    std::vector<double> ca(ra.size(), 0.0), cb(rb.size(), 0.0);
    std::vector<std::vector<double>> contingency(ra.size(), std::vector<double>(rb.size(), 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        int ia = ra[a[i]], ib = rb[b[i]];
        ca[static_cast<std::size_t>(ia)] += 1.0;
        cb[static_cast<std::size_t>(ib)] += 1.0;
        contingency[static_cast<std::size_t>(ia)][static_cast<std::size_t>(ib)] += 1.0;
    }

    auto comb2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i)
        for (std::size_t j = 0; j < cb.size(); ++j) sum_ij += comb2(contingency[i][j]);
    for (double c : ca) sum_a += comb2(c);
    for (double c : cb) sum_b += comb2(c);

    double pairs = comb2(static_cast<double>(n));
    double expected = pairs > 0.0 ? sum_a * sum_b / pairs : 0.0;
    double max_index = 0.5 * (sum_a + sum_b);
    double denom = max_index - expected;
    if (denom == 0.0) return 1.0;  // both all-singletons or both one cluster
    return (sum_ij - expected) / denom;
}

double eval_cohort_stability(const std::function<std::vector<int>(std::uint64_t)>& runner,
                             int t, std::uint64_t seed, int threads) {
    if (t < 2) throw std::invalid_argument("eval_cohort_stability: t must be >= 2");
    std::vector<std::vector<int>> runs(static_cast<std::size_t>(t));
    parallel_for(t, threads, [&](int i) {
        runs[static_cast<std::size_t>(i)] =
            runner(seed_combine({seed, static_cast<std::uint64_t>(i + 1)}));
    });
    double acc = 0.0;
    for (int i = 1; i < t; ++i)
        acc += adjusted_rand_index(runs[0], runs[static_cast<std::size_t>(i)]);
    return acc / static_cast<double>(t);
}

std::pair<double, double> eval_importance_stability(const BlackBoxModel& model,
                                                    const Dataset& ds,
                                                    const ExplainerConfig& explainer,
                                                    const CohortSolution& sol, int draws,
                                                    std::uint64_t seed, int threads,
                                                    bool* had_full_cohort) {
    if (draws < 2) throw std::invalid_argument("eval_importance_stability: draws must be >= 2");
    const auto members = sol.assignment.members();
    const std::size_t n = ds.n_samples();
    const std::size_t d = ds.n_features();
    if (had_full_cohort) *had_full_cohort = false;
    std::vector<char> full_cohort_flag(static_cast<std::size_t>(draws), 0);

    std::vector<double> draw_value(static_cast<std::size_t>(draws), 0.0);
    parallel_for(draws, threads, [&](int draw) {
        double total = 0.0;
        for (std::size_t j = 0; j < members.size(); ++j) {
            std::vector<char> inside(n, 0);
            for (int i : members[j]) inside[static_cast<std::size_t>(i)] = 1;
            std::vector<int> outside;
            outside.reserve(n - members[j].size());
            for (std::size_t i = 0; i < n; ++i)
                if (!inside[i]) outside.push_back(static_cast<int>(i));
            if (outside.empty()) {
                full_cohort_flag[static_cast<std::size_t>(draw)] = 1;  // contributes 0
                continue;
            }
            Rng rng(seed_combine({seed, static_cast<std::uint64_t>(draw),
                                  static_cast<std::uint64_t>(j), 0x737461ULL}));
            int extra = outside[rng.uniform_index(outside.size())];
            std::vector<int> augmented = members[j];
            augmented.push_back(extra);

            Dataset context = subset(ds, augmented);
            Importance mean;
            mean.scores.assign(d, 0.0);
            for (int i : augmented) {
                Importance imp =
                    explain(model, context, ds.features[static_cast<std::size_t>(i)], explainer);
                if (sol.gale)
                    for (std::size_t f = 0; f < d; ++f)
                        imp.scores[f] *= sol.gale_feature_weights[f];
                for (std::size_t f = 0; f < d; ++f) mean.scores[f] += imp.scores[f];
            }
            for (std::size_t f = 0; f < d; ++f)
                mean.scores[f] /= static_cast<double>(augmented.size());
            total += sq_norm_diff(sol.explanations[j].scores, mean.scores);
        }
        draw_value[static_cast<std::size_t>(draw)] = total;
    });
    if (had_full_cohort)
        *had_full_cohort =
            std::any_of(full_cohort_flag.begin(), full_cohort_flag.end(), [](char c) { return c; });
    return mean_and_stderr(draw_value);
}

bool verify_disjoint(const CohortSolution& sol, const Dataset& ds) {
    const auto& asg = sol.assignment;
    if (asg.assignment.empty()) return true;
    if (sol.regions.kind != CohortRegions::Kind::Membership) {
        // centroid- and tree-based partitions are disjoint by construction;
        // confirm the stored assignment is consistent with the regions
        for (std::size_t i = 0; i < ds.n_samples(); ++i)
            if (sol.regions.cohort_of(ds.features[i]) != asg.assignment[i]) return false;
        return true;
    }
    // VINE-style extensional cohorts: approximate convex-hull overlap by
    // checking every sample against the cohort feature-space means.
    const std::size_t k = static_cast<std::size_t>(asg.n_cohorts);
    if (k <= 1) return true;
    const std::size_t d = ds.n_features();
    std::vector<std::vector<double>> mean(k, std::vector<double>(d, 0.0));
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        std::size_t j = static_cast<std::size_t>(asg.assignment[i]);
        count[j] += 1.0;
        for (std::size_t f = 0; f < d; ++f) mean[j][f] += ds.features[i][f];
    }
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t f = 0; f < d; ++f) mean[j][f] /= count[j];
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        int nearest = 0;
        double nd = standardized_distance(ds.features[i], mean[0], ds.scaling);
        for (std::size_t j = 1; j < k; ++j) {
            double dist = standardized_distance(ds.features[i], mean[j], ds.scaling);
            if (dist < nd) {
                nd = dist;
                nearest = static_cast<int>(j);
            }
        }
        if (nearest != asg.assignment[i]) return false;
    }
    return true;
}

}  // namespace cohex
