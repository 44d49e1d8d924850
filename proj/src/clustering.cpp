#include "cohex/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cohex/parallel.hpp"
#include "cohex/rng.hpp"

namespace cohex {

std::vector<std::vector<int>> CohortAssignment::members() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n_cohorts));
    for (std::size_t i = 0; i < assignment.size(); ++i)
        out[static_cast<std::size_t>(assignment[i])].push_back(static_cast<int>(i));
    return out;
}

CohortAssignment assign(const std::vector<std::vector<double>>& centroids, const Dataset& ds) {
    if (centroids.empty()) throw std::invalid_argument("assign: need at least one centroid");
    const std::size_t n = ds.n_samples();
    std::vector<int> raw(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_dist = standardized_distance(ds.features[i], centroids[0], ds.scaling);
        for (std::size_t c = 1; c < centroids.size(); ++c) {
            double dist = standardized_distance(ds.features[i], centroids[c], ds.scaling);
            if (dist < best_dist) {
                best = static_cast<int>(c);
                best_dist = dist;
            }
        }
        raw[i] = best;
    }
    // prune empty cohorts, keeping centroid order
    std::vector<int> count(centroids.size(), 0);
    for (int a : raw) ++count[static_cast<std::size_t>(a)];
    std::vector<int> remap(centroids.size(), -1);
    CohortAssignment out;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        if (count[c] == 0) continue;
        remap[c] = static_cast<int>(out.centroids.size());
        out.centroids.push_back(centroids[c]);
    }
    out.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.assignment[i] = remap[static_cast<std::size_t>(raw[i])];
    out.n_cohorts = static_cast<int>(out.centroids.size());
    out.centroid_samples.assign(out.centroids.size(), -1);
    return out;
}

CohortAssignment assign_from_samples(const std::vector<int>& centroid_samples,
                                     const Dataset& ds) {
    if (centroid_samples.empty())
        throw std::invalid_argument("assign: need at least one centroid");
    const std::size_t n = ds.n_samples();
    std::vector<int> raw(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_dist = standardized_distance(
            ds.features[i], ds.features[static_cast<std::size_t>(centroid_samples[0])],
            ds.scaling);
        for (std::size_t c = 1; c < centroid_samples.size(); ++c) {
            double dist = standardized_distance(
                ds.features[i], ds.features[static_cast<std::size_t>(centroid_samples[c])],
                ds.scaling);
            if (dist < best_dist) {
                best = static_cast<int>(c);
                best_dist = dist;
            }
        }
        raw[i] = best;
    }
    std::vector<int> count(centroid_samples.size(), 0);
    for (int a : raw) ++count[static_cast<std::size_t>(a)];
    std::vector<int> remap(centroid_samples.size(), -1);
    CohortAssignment out;
    for (std::size_t c = 0; c < centroid_samples.size(); ++c) {
        if (count[c] == 0) continue;
        remap[c] = static_cast<int>(out.centroids.size());
        out.centroids.push_back(ds.features[static_cast<std::size_t>(centroid_samples[c])]);
        out.centroid_samples.push_back(centroid_samples[c]);
    }
    out.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.assignment[i] = remap[static_cast<std::size_t>(raw[i])];
    out.n_cohorts = static_cast<int>(out.centroids.size());
    return out;
}

double generalizability_loss(const std::vector<Importance>& importances,
                             const CohortAssignment& asg) {
    const std::size_t n = asg.assignment.size();
    if (n == 0) return 0.0;
    if (importances.size() != n)
        throw std::invalid_argument("generalizability_loss: importances length mismatch");
    const std::size_t d = importances[0].scores.size();
    const std::size_t k = static_cast<std::size_t>(asg.n_cohorts);

    std::vector<std::vector<double>> mean(k, std::vector<double>(d, 0.0));
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = static_cast<std::size_t>(asg.assignment[i]);
        count[j] += 1.0;
        for (std::size_t f = 0; f < d; ++f) mean[j][f] += importances[i].scores[f];
    }
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t f = 0; f < d; ++f) mean[j][f] /= count[j];

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = static_cast<std::size_t>(asg.assignment[i]);
        for (std::size_t f = 0; f < d; ++f) {
            double diff = importances[i].scores[f] - mean[j][f];
            loss += diff * diff;
        }
    }
    return loss / static_cast<double>(n);
}

double objective(const std::vector<Importance>& importances, const CohortAssignment& asg,
                 const ObjectiveParams& params, std::size_t n) {
    if (n == 0) throw std::invalid_argument("objective: n must be > 0");
    double excess = (static_cast<double>(asg.n_cohorts) - static_cast<double>(params.k_star)) /
                    static_cast<double>(n);
    return generalizability_loss(importances, asg) +
           params.lambda * std::sqrt(std::max(excess, 0.0));
}

namespace {

struct RestartOutcome {
    CohortAssignment assignment;
    double objective = 0.0;
    double initial_objective = 0.0;
    std::vector<double> trace;
};

RestartOutcome run_restart(const Dataset& ds, const std::vector<Importance>& importances,
                           const ObjectiveParams& params, std::vector<int> centroid_samples) {
    const std::size_t n = ds.n_samples();
    auto evaluate = [&](const std::vector<int>& cents) {
        CohortAssignment asg = assign_from_samples(cents, ds);
        double obj = objective(importances, asg, params, n);
        return std::make_pair(obj, std::move(asg));
    };

    std::sort(centroid_samples.begin(), centroid_samples.end());
    auto [cur_obj, cur_asg] = evaluate(centroid_samples);
    RestartOutcome out;
    out.initial_objective = cur_obj;
    out.trace.push_back(cur_obj);

    constexpr double kMinDecrease = 1e-12;
    while (true) {
        // working set: centroids that survived pruning
        std::vector<int> working = cur_asg.centroid_samples;
        std::vector<bool> is_centroid(n, false);
        for (int c : working) is_centroid[static_cast<std::size_t>(c)] = true;

        double best_obj = cur_obj;
        std::vector<int> best_set;
        // insertions, by ascending sample index
        for (std::size_t s = 0; s < n; ++s) {
            if (is_centroid[s]) continue;
            std::vector<int> cand = working;
            cand.push_back(static_cast<int>(s));
            std::sort(cand.begin(), cand.end());
            double obj = evaluate(cand).first;
            if (obj < best_obj - kMinDecrease) {
                best_obj = obj;
                best_set = std::move(cand);
            }
        }
        // deletions, by centroid position
        if (working.size() > 1) {
            for (std::size_t c = 0; c < working.size(); ++c) {
                std::vector<int> cand = working;
                cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(c));
                double obj = evaluate(cand).first;
                if (obj < best_obj - kMinDecrease) {
                    best_obj = obj;
                    best_set = std::move(cand);
                }
            }
        }
        if (best_set.empty()) break;
        std::tie(cur_obj, cur_asg) = evaluate(best_set);
        out.trace.push_back(cur_obj);
    }
    out.assignment = std::move(cur_asg);
    out.objective = cur_obj;
    return out;
}

SridhcrResult run_sridhcr(const Dataset& ds, const std::vector<Importance>& importances,
                          const ObjectiveParams& params,
                          const std::vector<int>* initial_centroids, std::uint64_t seed,
                          int restarts, int threads) {
    if (restarts < 1) throw std::invalid_argument("sridhcr: restarts must be >= 1");
    if (ds.n_samples() == 0) throw std::invalid_argument("sridhcr: empty dataset");
    const std::size_t n = ds.n_samples();
    const std::size_t k_init = std::min<std::size_t>(static_cast<std::size_t>(params.k_star), n);

    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(restarts));
    parallel_for(restarts, threads, [&](int r) {
        std::vector<int> init;
        if (r == 0 && initial_centroids) {
            init = *initial_centroids;
        } else {
            Rng rng(seed_combine({seed, static_cast<std::uint64_t>(r), 0x73726964ULL}));
            init = rng.sample_without_replacement(n, k_init);
        }
        outcomes[static_cast<std::size_t>(r)] = run_restart(ds, importances, params, init);
    });

    std::size_t best = 0;
    for (std::size_t r = 1; r < outcomes.size(); ++r)
        if (outcomes[r].objective < outcomes[best].objective) best = r;

    SridhcrResult result;
    result.assignment = std::move(outcomes[best].assignment);
    result.objective = outcomes[best].objective;
    result.trace = std::move(outcomes[best].trace);
    for (const auto& o : outcomes)
        result.restart_bounds.emplace_back(o.initial_objective, o.objective);
    return result;
}

}  // namespace

SridhcrResult sridhcr(const Dataset& ds, const std::vector<Importance>& importances,
                      const ObjectiveParams& params, std::uint64_t seed, int restarts,
                      int threads) {
    return run_sridhcr(ds, importances, params, nullptr, seed, restarts, threads);
}

SridhcrResult sridhcr_from(const Dataset& ds, const std::vector<Importance>& importances,
                           const ObjectiveParams& params,
                           const std::vector<int>& initial_centroids, std::uint64_t seed,
                           int extra_restarts, int threads) {
    return run_sridhcr(ds, importances, params, &initial_centroids, seed, 1 + extra_restarts,
                       threads);
}

}  // namespace cohex
