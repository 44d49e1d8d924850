#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cohex/clustering.hpp"
#include "cohex/explainer.hpp"
#include "cohex/region.hpp"

namespace cohex {

enum class Method { Cohex, Hierarchical, Vine, Repid };

Method method_from_string(const std::string& name);
std::string method_name(Method m);

// Instrumentation for the n * m * k * T cost accounting of the iterative
// loop. mean_explainer_ms is wall-clock and excluded from determinism
// guarantees.
struct Timing {
    int trials = 0;
    double mean_inner_iters = 0.0;
    double mean_k = 0.0;
    double mean_explainer_ms = 0.0;
};

// A cohort explanation: partition + per-cohort explanation vectors, plus the
// per-sample importances the explanations are averaged from.
struct CohortSolution {
    Method method = Method::Cohex;
    CohortAssignment assignment;
    CohortRegions regions;
    std::vector<Importance> explanations;  // per cohort, mean of members' importances
    std::vector<Importance> per_sample;    // final contextual importances, sample order
    std::vector<std::pair<int, double>> loss_trace;  // (iteration, best objective so far)
    double objective_value = 0.0;
    ObjectiveParams objective_params;
    std::uint64_t seed = 0;
    Timing timing;
    bool gale = false;
    std::vector<double> gale_feature_weights;
    std::vector<std::string> warnings;

    std::size_t n_cohorts() const { return explanations.size(); }
};

// Per-cohort means of per-sample importances under an assignment.
std::vector<Importance> cohort_means(const std::vector<Importance>& per_sample,
                                     const CohortAssignment& asg);

}  // namespace cohex
