#pragma once

#include <cstdint>
#include <vector>

#include "cohex/dataset.hpp"
#include "cohex/explainer.hpp"

namespace cohex {

// Nearest-centroid partition of a dataset. Every sample is assigned to its
// closest centroid under standardized distance (ties to the lowest centroid
// index) and empty cohorts are pruned, so k is always the number of
// non-empty cohorts.
struct CohortAssignment {
    std::vector<std::vector<double>> centroids;  // empty for importance-space partitions
    std::vector<int> centroid_samples;  // source sample index per centroid, -1 if unknown
    std::vector<int> assignment;        // per-sample cohort index in [0, k)
    int n_cohorts = 0;

    int k() const { return n_cohorts; }
    std::vector<std::vector<int>> members() const;
};

struct ObjectiveParams {
    double lambda = 0.0;
    int k_star = 1;
};

CohortAssignment assign(const std::vector<std::vector<double>>& centroids, const Dataset& ds);
CohortAssignment assign_from_samples(const std::vector<int>& centroid_samples,
                                     const Dataset& ds);

// Mean squared deviation of per-sample importances from their cohort mean,
// normalized by the total sample count.
double generalizability_loss(const std::vector<Importance>& importances,
                             const CohortAssignment& asg);

// generalizability_loss + lambda * sqrt(max((k - k_star) / n, 0))
double objective(const std::vector<Importance>& importances, const CohortAssignment& asg,
                 const ObjectiveParams& params, std::size_t n);

struct SridhcrResult {
    CohortAssignment assignment;
    double objective = 0.0;
    // (initial, final) objective per restart, restart order.
    std::vector<std::pair<double, double>> restart_bounds;
    // objective after every applied move of the winning restart
    std::vector<double> trace;
};

// Single Representative Insertion/Deletion Steepest Descent Hill Climbing
// with randomized restarts. Centroids are dataset samples; every iteration
// evaluates all single insertions and deletions and applies the steepest
// objective decrease until no move improves by more than 1e-12. Importances
// are taken as fixed. Best restart wins, ties to the lowest restart index.
SridhcrResult sridhcr(const Dataset& ds, const std::vector<Importance>& importances,
                      const ObjectiveParams& params, std::uint64_t seed, int restarts,
                      int threads = 1);

// Same, but restart 0 starts from the given centroid sample set.
SridhcrResult sridhcr_from(const Dataset& ds, const std::vector<Importance>& importances,
                           const ObjectiveParams& params,
                           const std::vector<int>& initial_centroids, std::uint64_t seed,
                           int extra_restarts, int threads = 1);

}  // namespace cohex
