#include "cohex/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cohex/parallel.hpp"
#include "cohex/rng.hpp"

namespace cohex {

namespace {

std::vector<Importance> full_context_importances(const BlackBoxModel& model, const Dataset& ds,
                                                 const ExplainerConfig& explainer,
                                                 int threads) {
    std::vector<Importance> w(ds.n_samples());
    parallel_for(static_cast<int>(ds.n_samples()), threads, [&](int i) {
        w[static_cast<std::size_t>(i)] =
            explain(model, ds, ds.features[static_cast<std::size_t>(i)], explainer);
    });
    return w;
}

std::vector<int> predicted_classes(const BlackBoxModel& model, const Dataset& ds) {
    std::vector<int> preds(ds.n_samples());
    for (std::size_t i = 0; i < ds.n_samples(); ++i)
        preds[i] = model.predict(ds.features[i]).predicted_class();
    return preds;
}

void apply_gale(const BlackBoxModel& model, const Dataset& ds, std::vector<Importance>& w,
                CohortSolution& sol) {
    if (model.task() != Task::Classification)
        throw std::invalid_argument("GALE applies to classification tasks only");
    sol.gale = true;
    sol.gale_feature_weights = gale_weights(w, predicted_classes(model, ds));
    for (auto& imp : w)
        for (std::size_t f = 0; f < imp.scores.size(); ++f)
            imp.scores[f] *= sol.gale_feature_weights[f];
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

struct KmeansResult {
    std::vector<int> assignment;
    int k = 0;
    double sse = 0.0;
};

KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed) {
    const std::size_t n = points.size();
    const std::size_t d = points[0].size();
    constexpr int kRestarts = 20;
    constexpr int kMaxIters = 100;

    KmeansResult best;
    best.sse = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < kRestarts; ++restart) {
        Rng rng(seed_combine({seed, static_cast<std::uint64_t>(restart), 0x6b6d65616eULL}));

        // k-means++ seeding
        std::vector<std::vector<double>> centers;
        centers.push_back(points[rng.uniform_index(n)]);
        std::vector<double> dist2(n);
        while (centers.size() < static_cast<std::size_t>(k)) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double nearest = std::numeric_limits<double>::infinity();
                for (const auto& c : centers) nearest = std::min(nearest, sq_dist(points[i], c));
                dist2[i] = nearest;
                total += nearest;
            }
            if (total <= 0.0) {
                // fewer distinct points than k; reuse an arbitrary point
                centers.push_back(points[rng.uniform_index(n)]);
                continue;
            }
            double u = rng.uniform() * total;
            double acc = 0.0;
            std::size_t chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (u < acc) {
                    chosen = i;
                    break;
                }
            }
            centers.push_back(points[chosen]);
        }

        std::vector<int> asg(n, 0);
        for (int it = 0; it < kMaxIters; ++it) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                int nearest = 0;
                double nd = sq_dist(points[i], centers[0]);
                for (std::size_t c = 1; c < centers.size(); ++c) {
                    double dd = sq_dist(points[i], centers[c]);
                    if (dd < nd) {
                        nd = dd;
                        nearest = static_cast<int>(c);
                    }
                }
                if (asg[i] != nearest) {
                    asg[i] = nearest;
                    changed = true;
                }
            }
            std::vector<std::vector<double>> sums(centers.size(), std::vector<double>(d, 0.0));
            std::vector<double> counts(centers.size(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                counts[static_cast<std::size_t>(asg[i])] += 1.0;
                for (std::size_t f = 0; f < d; ++f)
                    sums[static_cast<std::size_t>(asg[i])][f] += points[i][f];
            }
            for (std::size_t c = 0; c < centers.size(); ++c) {
                if (counts[c] == 0.0) continue;  // empty cluster keeps its center
                for (std::size_t f = 0; f < d; ++f) centers[c][f] = sums[c][f] / counts[c];
            }
            if (!changed && it > 0) break;
        }

        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            sse += sq_dist(points[i], centers[static_cast<std::size_t>(asg[i])]);
        if (sse < best.sse - 1e-15) {
            // prune empty clusters, renumber in first-appearance-by-center order
            std::vector<int> counts(centers.size(), 0);
            for (int a : asg) ++counts[static_cast<std::size_t>(a)];
            std::vector<int> remap(centers.size(), -1);
            int next = 0;
            for (std::size_t c = 0; c < centers.size(); ++c)
                if (counts[c] > 0) remap[c] = next++;
            best.assignment.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                best.assignment[i] = remap[static_cast<std::size_t>(asg[i])];
            best.k = next;
            best.sse = sse;
        }
    }
    return best;
}

}  // namespace

CohortSolution run_vine(const BlackBoxModel& model, const Dataset& ds,
                        const ExplainerConfig& explainer, int k, const ObjectiveParams& params,
                        std::uint64_t seed, bool gale, int threads) {
    if (k < 1) throw std::invalid_argument("vine: k must be >= 1");
    if (static_cast<std::size_t>(k) > ds.n_samples())
        throw std::invalid_argument("vine: k exceeds the number of samples");

    CohortSolution sol;
    sol.method = Method::Vine;
    sol.seed = seed;
    sol.objective_params = params;

    std::vector<Importance> w = full_context_importances(model, ds, explainer, threads);
    if (gale) apply_gale(model, ds, w, sol);

    std::vector<std::vector<double>> points;
    points.reserve(w.size());
    for (const auto& imp : w) points.push_back(imp.scores);
    KmeansResult km = kmeans(points, k, seed);
    if (km.k < k)
        sol.warnings.push_back("vine: requested " + std::to_string(k) +
                               " clusters, importance vectors support only " +
                               std::to_string(km.k));

    sol.assignment.assignment = km.assignment;
    sol.assignment.n_cohorts = km.k;
    sol.per_sample = std::move(w);
    sol.explanations = cohort_means(sol.per_sample, sol.assignment);
    sol.objective_value = objective(sol.per_sample, sol.assignment, params, ds.n_samples());
    sol.loss_trace.emplace_back(1, sol.objective_value);

    auto members = sol.assignment.members();
    std::vector<std::vector<std::vector<double>>> region_members(members.size());
    for (std::size_t j = 0; j < members.size(); ++j)
        for (int i : members[j])
            region_members[j].push_back(ds.features[static_cast<std::size_t>(i)]);
    sol.regions = CohortRegions::from_members(std::move(region_members));

    sol.timing.trials = 1;
    sol.timing.mean_inner_iters = 1.0;
    sol.timing.mean_k = km.k;
    return sol;
}

namespace {

// Greedy importance-variance partition tree. Returns the region-tree node
// index; leaves get sequential cohort ids in creation (preorder) order.
int grow_repid(const Dataset& ds, const std::vector<Importance>& w, std::vector<int> idx,
               int depth, int max_depth, std::vector<RegionTreeNode>& nodes,
               std::vector<int>& leaf_assignment, int& next_cohort) {
    const std::size_t d_feat = ds.n_features();
    const std::size_t d_imp = w[0].scores.size();

    bool allow_split = depth < max_depth && idx.size() >= 2;
    int best_feature = -1;
    double best_threshold = 0.0;
    if (allow_split) {
        // parent SSE (summed over importance dimensions)
        std::vector<double> sum(d_imp, 0.0), sum2(d_imp, 0.0);
        for (int i : idx)
            for (std::size_t f = 0; f < d_imp; ++f) {
                double v = w[static_cast<std::size_t>(i)].scores[f];
                sum[f] += v;
                sum2[f] += v * v;
            }
        double parent_sse = 0.0;
        for (std::size_t f = 0; f < d_imp; ++f)
            parent_sse += sum2[f] - sum[f] * sum[f] / static_cast<double>(idx.size());

        double best_children = std::numeric_limits<double>::infinity();
        std::vector<int> order(idx);
        for (std::size_t feat = 0; feat < d_feat; ++feat) {
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                double va = ds.features[static_cast<std::size_t>(a)][feat];
                double vb = ds.features[static_cast<std::size_t>(b)][feat];
                return va < vb || (va == vb && a < b);
            });
            std::vector<double> lsum(d_imp, 0.0), lsum2(d_imp, 0.0);
            for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
                int i = order[pos];
                for (std::size_t f = 0; f < d_imp; ++f) {
                    double v = w[static_cast<std::size_t>(i)].scores[f];
                    lsum[f] += v;
                    lsum2[f] += v * v;
                }
                double v_here = ds.features[static_cast<std::size_t>(i)][feat];
                double v_next = ds.features[static_cast<std::size_t>(order[pos + 1])][feat];
                if (v_here == v_next) continue;
                double n_l = static_cast<double>(pos + 1);
                double n_r = static_cast<double>(order.size() - pos - 1);
                double children = 0.0;
                for (std::size_t f = 0; f < d_imp; ++f) {
                    double rsum = sum[f] - lsum[f];
                    double rsum2 = sum2[f] - lsum2[f];
                    children += lsum2[f] - lsum[f] * lsum[f] / n_l;
                    children += rsum2 - rsum * rsum / n_r;
                }
                if (children < best_children - 1e-15) {
                    best_children = children;
                    best_feature = static_cast<int>(feat);
                    best_threshold = 0.5 * (v_here + v_next);
                }
            }
        }
        // split only on a strict variance reduction
        if (best_feature >= 0 && parent_sse - best_children <= 1e-12) best_feature = -1;
    }

    int self = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (best_feature < 0) {
        nodes[static_cast<std::size_t>(self)].leaf_cohort = next_cohort;
        for (int i : idx) leaf_assignment[static_cast<std::size_t>(i)] = next_cohort;
        ++next_cohort;
        return self;
    }
    nodes[static_cast<std::size_t>(self)].feature = best_feature;
    nodes[static_cast<std::size_t>(self)].threshold = best_threshold;
    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
        if (ds.features[static_cast<std::size_t>(i)][static_cast<std::size_t>(best_feature)] <=
            best_threshold)
            left_idx.push_back(i);
        else
            right_idx.push_back(i);
    }
    int l = grow_repid(ds, w, std::move(left_idx), depth + 1, max_depth, nodes, leaf_assignment,
                       next_cohort);
    int r = grow_repid(ds, w, std::move(right_idx), depth + 1, max_depth, nodes,
                       leaf_assignment, next_cohort);
    nodes[static_cast<std::size_t>(self)].left = l;
    nodes[static_cast<std::size_t>(self)].right = r;
    return self;
}

}  // namespace

CohortSolution run_repid(const BlackBoxModel& model, const Dataset& ds,
                         const ExplainerConfig& explainer, int max_depth,
                         const ObjectiveParams& params, bool gale, int threads) {
    if (max_depth < 1) throw std::invalid_argument("repid: max_depth must be >= 1");
    if (ds.n_samples() == 0) throw std::invalid_argument("repid: empty dataset");

    CohortSolution sol;
    sol.method = Method::Repid;
    sol.seed = 0;  // deterministic, no RNG
    sol.objective_params = params;

    std::vector<Importance> w = full_context_importances(model, ds, explainer, threads);
    if (gale) apply_gale(model, ds, w, sol);

    std::vector<int> idx(ds.n_samples());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::vector<RegionTreeNode> nodes;
    std::vector<int> leaf_assignment(ds.n_samples(), -1);
    int next_cohort = 0;
    grow_repid(ds, w, std::move(idx), 0, max_depth, nodes, leaf_assignment, next_cohort);

    sol.assignment.assignment = std::move(leaf_assignment);
    sol.assignment.n_cohorts = next_cohort;
    sol.per_sample = std::move(w);
    sol.explanations = cohort_means(sol.per_sample, sol.assignment);
    sol.objective_value = objective(sol.per_sample, sol.assignment, params, ds.n_samples());
    sol.loss_trace.emplace_back(1, sol.objective_value);
    sol.regions = CohortRegions::from_tree(std::move(nodes), next_cohort);
    sol.timing.trials = 1;
    sol.timing.mean_inner_iters = 1.0;
    sol.timing.mean_k = next_cohort;
    return sol;
}

}  // namespace cohex
