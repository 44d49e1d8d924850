#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cohex/dataset.hpp"
#include "cohex/model.hpp"

namespace cohex {

// Per-feature attribution scores for one sample, in feature-column order.
struct Importance {
    std::vector<double> scores;
    bool condition_warning = false;  // surrogate fit hit an ill-conditioned design
};

enum class ExplainerMethod { Counterfactual, LinearSurrogate, Shapley };

struct ExplainerConfig {
    ExplainerMethod method = ExplainerMethod::Counterfactual;
    int n_perturbations = 200;       // linear surrogate sample count
    double kernel_width = 1.0;       // surrogate weight = exp(-d^2 / kw^2), d standardized
    int shapley_samples = 64;        // Monte Carlo permutations above the exact threshold
    int exact_shapley_threshold = 10;
    std::uint64_t seed = 0;
    // Regression counterfactuals count an output move larger than this
    // fraction of the context prediction stddev as a class flip.
    double regression_flip_fraction = 0.5;
};

ExplainerMethod explainer_method_from_string(const std::string& name);
std::string explainer_method_name(ExplainerMethod m);

// Importance from the smallest on-grid perturbation of a single feature that
// changes the predicted class: (range - delta) / range, 0 when no flip exists
// within the feature's observed range in `context`. The grid has 200 steps
// over the range. Deterministic (no sampling).
Importance explain_counterfactual(const BlackBoxModel& model, const Dataset& context,
                                  const std::vector<double>& x, const ExplainerConfig& cfg);

// Weighted ridge fit of the model output on Gaussian perturbations around x;
// importance = |coefficients|.
Importance explain_linear_surrogate(const BlackBoxModel& model, const Dataset& context,
                                    const std::vector<double>& x, const ExplainerConfig& cfg);

// Shapley values of the model output with absent features replaced by
// background values. Exact subset enumeration for up to
// cfg.exact_shapley_threshold features (averaging over the full context when
// it has at most 32 rows, its mean otherwise); Monte Carlo permutation
// sampling above the threshold. Signed scores.
Importance explain_shapley(const BlackBoxModel& model, const Dataset& context,
                           const std::vector<double>& x, const ExplainerConfig& cfg);

// Dispatch on cfg.method.
Importance explain(const BlackBoxModel& model, const Dataset& context,
                   const std::vector<double>& x, const ExplainerConfig& cfg);

// Homogeneity re-weighting of per-sample importances for classification:
// features whose importance mass is spread evenly across predicted classes
// are damped, and the least homogeneous feature is zeroed outright (min-max
// normalization). Classification only.
std::vector<Importance> gale_reweight(const std::vector<Importance>& importances,
                                      const std::vector<int>& predicted_classes);

// The per-feature weights gale_reweight multiplies into the scores.
std::vector<double> gale_weights(const std::vector<Importance>& importances,
                                 const std::vector<int>& predicted_classes);

}  // namespace cohex
