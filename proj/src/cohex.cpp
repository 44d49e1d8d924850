#include "cohex/cohex.hpp"

#include <chrono>
#include <limits>
#include <stdexcept>

#include "cohex/parallel.hpp"
#include "cohex/rng.hpp"

namespace cohex {

std::vector<Importance> cohort_means(const std::vector<Importance>& per_sample,
                                     const CohortAssignment& asg) {
    const std::size_t k = static_cast<std::size_t>(asg.n_cohorts);
    const std::size_t d = per_sample.empty() ? 0 : per_sample[0].scores.size();
    std::vector<Importance> means(k);
    std::vector<double> count(k, 0.0);
    for (auto& m : means) m.scores.assign(d, 0.0);
    for (std::size_t i = 0; i < per_sample.size(); ++i) {
        std::size_t j = static_cast<std::size_t>(asg.assignment[i]);
        count[j] += 1.0;
        for (std::size_t f = 0; f < d; ++f) means[j].scores[f] += per_sample[i].scores[f];
    }
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t f = 0; f < d; ++f) means[j].scores[f] /= count[j];
    return means;
}

Method method_from_string(const std::string& name) {
    if (name == "cohex") return Method::Cohex;
    if (name == "hier" || name == "hierarchical") return Method::Hierarchical;
    if (name == "vine") return Method::Vine;
    if (name == "repid") return Method::Repid;
    throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Cohex: return "cohex";
        case Method::Hierarchical: return "hier";
        case Method::Vine: return "vine";
        case Method::Repid: return "repid";
    }
    return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

void validate(const Dataset& ds, const CohexConfig& cfg) {
    if (ds.n_samples() == 0) throw std::invalid_argument("cohex: empty dataset");
    if (cfg.n_trials < 1 || cfg.patience < 1 || cfg.max_inner_iters < 1 ||
        cfg.sridhcr_restarts < 1 || cfg.k_star < 1)
        throw std::invalid_argument("cohex: counts must be >= 1");
    if (static_cast<std::size_t>(cfg.k_star) > ds.n_samples())
        throw std::invalid_argument("cohex: k_star exceeds the number of samples");
    if (cfg.lambda < 0.0) throw std::invalid_argument("cohex: lambda must be >= 0");
}

// Importances for every sample, each computed with its own cohort as the
// explainer context. Explainer failures carry the cohort index.
std::vector<Importance> recompute_cohort_importances(const BlackBoxModel& model,
                                                     const Dataset& ds,
                                                     const CohortAssignment& asg,
                                                     const ExplainerConfig& explainer,
                                                     double& explainer_ms, int& calls) {
    std::vector<Importance> w(ds.n_samples());
    auto members = asg.members();
    auto start = Clock::now();
    for (std::size_t j = 0; j < members.size(); ++j) {
        Dataset context = subset(ds, members[j]);
        try {
            for (int i : members[j]) {
                w[static_cast<std::size_t>(i)] =
                    explain(model, context, ds.features[static_cast<std::size_t>(i)], explainer);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("explainer failed on cohort " + std::to_string(j) + " (" +
                                     std::to_string(members[j].size()) + " samples): " +
                                     e.what());
        }
    }
    explainer_ms += std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    calls += static_cast<int>(ds.n_samples());
    return w;
}

struct TrialOutcome {
    CohortAssignment assignment;
    std::vector<Importance> per_sample;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, double>> trace;
    int inner_iters = 0;
    double k_sum = 0.0;
    double explainer_ms = 0.0;
    int explainer_calls = 0;
};

TrialOutcome run_trial(const BlackBoxModel& model, const Dataset& ds,
                       const ExplainerConfig& explainer, const CohexConfig& cfg, int trial,
                       const ObjectiveParams& params) {
    const std::size_t n = ds.n_samples();
    TrialOutcome out;

    Rng rng(seed_combine({cfg.seed, static_cast<std::uint64_t>(trial), 0x636f6865ULL}));
    std::vector<int> centroid_samples =
        rng.sample_without_replacement(n, static_cast<std::size_t>(cfg.k_star));
    CohortAssignment asg = assign_from_samples(centroid_samples, ds);

    double best_obj = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int iter = 1; iter <= cfg.max_inner_iters; ++iter) {
        ++out.inner_iters;
        out.k_sum += asg.n_cohorts;
        std::vector<Importance> w = recompute_cohort_importances(
            model, ds, asg, explainer, out.explainer_ms, out.explainer_calls);
        double obj = objective(w, asg, params, n);
        if (obj < best_obj - 1e-12) {
            best_obj = obj;
            stall = 0;
            out.assignment = asg;
            out.per_sample = w;
            out.objective = obj;
        } else {
            ++stall;
        }
        out.trace.emplace_back(iter, best_obj);
        if (stall >= cfg.patience || iter == cfg.max_inner_iters) break;

        // Recluster on the importances just computed, even when they did not
        // improve the best snapshot; only coherent snapshots are returned.
        SridhcrResult re = sridhcr_from(
            ds, w, params, asg.centroid_samples,
            seed_combine({cfg.seed, static_cast<std::uint64_t>(trial),
                          static_cast<std::uint64_t>(iter)}),
            cfg.sridhcr_restarts - 1);
        asg = std::move(re.assignment);
    }
    return out;
}

CohortSolution finalize_centroid_solution(Method method, const Dataset& ds,
                                          CohortAssignment asg,
                                          std::vector<Importance> per_sample, double obj,
                                          const ObjectiveParams& params, std::uint64_t seed) {
    CohortSolution sol;
    sol.method = method;
    sol.regions = CohortRegions::from_centroids(asg.centroids, ds.scaling);
    sol.assignment = std::move(asg);
    sol.per_sample = std::move(per_sample);
    sol.explanations = cohort_means(sol.per_sample, sol.assignment);
    sol.objective_value = obj;
    sol.objective_params = params;
    sol.seed = seed;
    return sol;
}

}  // namespace

CohortSolution run_cohex(const BlackBoxModel& model, const Dataset& ds,
                         const ExplainerConfig& explainer, const CohexConfig& cfg) {
    validate(ds, cfg);
    if (cfg.single_pass) return run_single_pass(model, ds, explainer, cfg);
    const ObjectiveParams params{cfg.lambda, cfg.k_star};

    std::vector<TrialOutcome> trials(static_cast<std::size_t>(cfg.n_trials));
    parallel_for(cfg.n_trials, cfg.threads, [&](int t) {
        trials[static_cast<std::size_t>(t)] = run_trial(model, ds, explainer, cfg, t, params);
    });

    std::size_t best = 0;
    for (std::size_t t = 1; t < trials.size(); ++t)
        if (trials[t].objective < trials[best].objective) best = t;

    Timing timing;
    timing.trials = cfg.n_trials;
    double iters = 0.0, k_sum = 0.0, ms = 0.0;
    int calls = 0;
    for (const auto& t : trials) {
        iters += t.inner_iters;
        k_sum += t.k_sum;
        ms += t.explainer_ms;
        calls += t.explainer_calls;
    }
    timing.mean_inner_iters = iters / static_cast<double>(cfg.n_trials);
    timing.mean_k = iters > 0.0 ? k_sum / iters : 0.0;
    timing.mean_explainer_ms = calls > 0 ? ms / static_cast<double>(calls) : 0.0;

    CohortSolution sol = finalize_centroid_solution(
        Method::Cohex, ds, std::move(trials[best].assignment),
        std::move(trials[best].per_sample), trials[best].objective, params, cfg.seed);
    sol.loss_trace = std::move(trials[best].trace);
    sol.timing = timing;
    return sol;
}

CohortSolution run_single_pass(const BlackBoxModel& model, const Dataset& ds,
                               const ExplainerConfig& explainer, const CohexConfig& cfg) {
    validate(ds, cfg);
    const ObjectiveParams params{cfg.lambda, cfg.k_star};
    const std::size_t n = ds.n_samples();

    auto start = std::chrono::steady_clock::now();
    std::vector<Importance> w(n);
    parallel_for(static_cast<int>(n), cfg.threads, [&](int i) {
        w[static_cast<std::size_t>(i)] =
            explain(model, ds, ds.features[static_cast<std::size_t>(i)], explainer);
    });
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          start)
                    .count();

    SridhcrResult re = sridhcr(ds, w, params, seed_combine({cfg.seed, 0x68696572ULL}),
                               cfg.sridhcr_restarts, cfg.threads);

    CohortSolution sol = finalize_centroid_solution(Method::Hierarchical, ds,
                                                    std::move(re.assignment), std::move(w),
                                                    re.objective, params, cfg.seed);
    sol.loss_trace.emplace_back(1, re.objective);
    sol.timing.trials = 1;
    sol.timing.mean_inner_iters = 1.0;
    sol.timing.mean_k = sol.assignment.n_cohorts;
    sol.timing.mean_explainer_ms = ms / static_cast<double>(n);
    return sol;
}

}  // namespace cohex
