#pragma once

#include <cstdint>

#include "cohex/model.hpp"
#include "cohex/solution.hpp"

namespace cohex {

struct CohexConfig {
    int n_trials = 10;
    int k_star = 4;
    double lambda = 1.0;
    int patience = 3;        // stop a trial when the best objective stalls this long
    int max_inner_iters = 50;
    std::uint64_t seed = 0;
    bool single_pass = false;
    int sridhcr_restarts = 3;  // reclustering restarts: current centroids + this many random
    int threads = 1;
};

// Iterative cohort explanation: alternate between recomputing local
// importances with cohort-restricted context and reclustering with SRIDHCR,
// keeping the best coherent (partition, importances) snapshot seen. Runs
// n_trials independent random initializations and returns the best solution
// (ties to the lowest trial index).
CohortSolution run_cohex(const BlackBoxModel& model, const Dataset& ds,
                         const ExplainerConfig& explainer, const CohexConfig& cfg);

// One pass: full-dataset-context importances, one SRIDHCR clustering,
// per-cohort averaging. This is the hierarchical baseline and the fallback
// for explainers that ignore their context.
CohortSolution run_single_pass(const BlackBoxModel& model, const Dataset& ds,
                               const ExplainerConfig& explainer, const CohexConfig& cfg);

}  // namespace cohex
