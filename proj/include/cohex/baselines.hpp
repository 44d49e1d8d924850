#pragma once

#include <cstdint>

#include "cohex/model.hpp"
#include "cohex/solution.hpp"

namespace cohex {

// VINE: full-context importances once, then k-means (k-means++ init, 20
// restarts, at most 100 Lloyd iterations) on the importance vectors alone.
// Cohorts are importance-space clusters and need not be disjoint in feature
// space; the solution carries extensional member regions. `gale` re-weights
// the importances before clustering (classification only).
CohortSolution run_vine(const BlackBoxModel& model, const Dataset& ds,
                        const ExplainerConfig& explainer, int k, const ObjectiveParams& params,
                        std::uint64_t seed, bool gale = false, int threads = 1);

// REPID: full-context importances once, then a greedy axis-aligned partition
// tree on the features, each split minimizing the summed within-child
// variance of the importance vectors. Deterministic; leaves are cohorts.
CohortSolution run_repid(const BlackBoxModel& model, const Dataset& ds,
                         const ExplainerConfig& explainer, int max_depth,
                         const ObjectiveParams& params, bool gale = false, int threads = 1);

}  // namespace cohex
