#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "cohex/model.hpp"
#include "cohex/solution.hpp"

namespace cohex {

struct LocalityPoint {
    double p = 0.0;
    double value = 0.0;
    double stderr_value = 0.0;
};

struct MetricReport {
    double generalizability = 0.0;
    double objective_value = 0.0;
    std::vector<LocalityPoint> locality;
    double locality_summary = 0.0;         // mean of values at p > 0
    double locality_summary_stderr = 0.0;  // sqrt(sum se^2) / count over the same points
    double cohort_stability = 0.0;         // (1/t) sum_{i=2..t} ARI(a_1, a_i)
    double cohort_stability_mean = 0.0;    // same sum normalized by t-1
    double importance_stability = 0.0;
    double importance_stability_stderr = 0.0;
    bool disjoint = true;
    int repeats = 0;
    int stability_runs = 0;
    int draws = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

double eval_generalizability(const CohortSolution& sol);

// Locality loss at each p: rebuild each cohort's explanation with a model
// randomized outside that cohort's region and measure the summed squared
// explanation shift, averaged over `repeats` independent randomizations
// (stream seeds derived from (seed, p, repeat, cohort)).
std::vector<LocalityPoint> eval_locality(const BlackBoxModel& model, const Dataset& ds,
                                         const ExplainerConfig& explainer,
                                         const CohortSolution& sol,
                                         const std::vector<double>& p_grid, int repeats,
                                         std::uint64_t seed, int threads = 1);

// Chance-corrected partition similarity in [-1, 1]. Partitions with a
// degenerate pair-counting denominator (both all-singletons or both a single
// cluster) compare as 1.0.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// (1/t) sum_{i=2..t} ARI(first run, i-th run); runner receives a derived
// seed per run.
double eval_cohort_stability(const std::function<std::vector<int>(std::uint64_t)>& runner,
                             int t, std::uint64_t seed, int threads = 1);

// Expected squared change of each cohort's explanation when one uniformly
// chosen outside sample joins it and the explanation is recomputed on the
// augmented cohort (cohort-restricted context for every method). Returns
// (Monte Carlo mean, stderr); outside-sample-free cohorts contribute 0 and
// set *all_covered_flag when provided.
std::pair<double, double> eval_importance_stability(const BlackBoxModel& model,
                                                    const Dataset& ds,
                                                    const ExplainerConfig& explainer,
                                                    const CohortSolution& sol, int draws,
                                                    std::uint64_t seed, int threads = 1,
                                                    bool* had_full_cohort = nullptr);

// Structural check for centroid- and tree-based solutions; for
// membership-based cohorts (VINE) an interleaving test: a sample whose
// nearest cohort feature-mean belongs to another cohort fails the check.
bool verify_disjoint(const CohortSolution& sol, const Dataset& ds);

// Re-runs the solution's own explanation step for one cohort under an
// arbitrary model (cohort context for CohEx, full-dataset context plus
// optional GALE re-weighting for the baselines). Exposed for the locality
// metric and tests.
Importance explain_cohort_step(const BlackBoxModel& model, const Dataset& ds,
                               const ExplainerConfig& explainer, const CohortSolution& sol,
                               int cohort);

}  // namespace cohex
