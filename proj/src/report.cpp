#include "cohex/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cohex {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out = "fnv1a:";
    for (int shift = 60; shift >= 0; shift -= 4) out += digits[(h >> shift) & 0xF];
    return out;
}

Json explainer_config_to_json(const ExplainerConfig& cfg) {
    Json j;
    j["method"] = explainer_method_name(cfg.method);
    j["n_perturbations"] = cfg.n_perturbations;
    j["kernel_width"] = cfg.kernel_width;
    j["shapley_samples"] = cfg.shapley_samples;
    j["exact_shapley_threshold"] = cfg.exact_shapley_threshold;
    j["seed"] = cfg.seed;
    j["regression_flip_fraction"] = cfg.regression_flip_fraction;
    return j;
}

ExplainerConfig explainer_config_from_json(const Json& j) {
    ExplainerConfig cfg;
    cfg.method = explainer_method_from_string(j.at("method").get<std::string>());
    cfg.n_perturbations = j.at("n_perturbations").get<int>();
    cfg.kernel_width = j.at("kernel_width").get<double>();
    cfg.shapley_samples = j.at("shapley_samples").get<int>();
    cfg.exact_shapley_threshold = j.at("exact_shapley_threshold").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.regression_flip_fraction = j.at("regression_flip_fraction").get<double>();
    return cfg;
}

namespace {

Json scores_json(const Importance& imp) { return Json(imp.scores); }

Json region_to_json(const CohortRegions& r) {
    Json j;
    switch (r.kind) {
        case CohortRegions::Kind::Centroid: {
            j["kind"] = "centroid";
            j["centroids"] = r.centroids;
            j["scaling_mean"] = r.scaling.mean;
            j["scaling_stddev"] = r.scaling.stddev;
            break;
        }
        case CohortRegions::Kind::Tree: {
            j["kind"] = "tree";
            Json nodes = Json::array();
            for (const auto& nd : r.tree) {
                if (nd.is_leaf())
                    nodes.push_back(Json{{"cohort", nd.leaf_cohort}});
                else
                    nodes.push_back(Json{{"feature", nd.feature},
                                         {"threshold", nd.threshold},
                                         {"left", nd.left},
                                         {"right", nd.right}});
            }
            j["nodes"] = nodes;
            break;
        }
        case CohortRegions::Kind::Membership: {
            j["kind"] = "membership";
            break;
        }
    }
    return j;
}

CohortRegions region_from_json(const Json& j, const CohortSolution& sol, const Dataset& ds) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "centroid") {
        Scaling scaling;
        scaling.mean = j.at("scaling_mean").get<std::vector<double>>();
        scaling.stddev = j.at("scaling_stddev").get<std::vector<double>>();
        return CohortRegions::from_centroids(
            j.at("centroids").get<std::vector<std::vector<double>>>(), std::move(scaling));
    }
    if (kind == "tree") {
        std::vector<RegionTreeNode> nodes;
        for (const auto& jn : j.at("nodes")) {
            RegionTreeNode nd;
            if (jn.contains("cohort")) {
                nd.leaf_cohort = jn.at("cohort").get<int>();
            } else {
                nd.feature = jn.at("feature").get<int>();
                nd.threshold = jn.at("threshold").get<double>();
                nd.left = jn.at("left").get<int>();
                nd.right = jn.at("right").get<int>();
            }
            nodes.push_back(nd);
        }
        return CohortRegions::from_tree(std::move(nodes),
                                        static_cast<int>(sol.n_cohorts()));
    }
    if (kind == "membership") {
        auto members = sol.assignment.members();
        std::vector<std::vector<std::vector<double>>> region_members(members.size());
        for (std::size_t c = 0; c < members.size(); ++c)
            for (int i : members[c])
                region_members[c].push_back(ds.features[static_cast<std::size_t>(i)]);
        return CohortRegions::from_members(std::move(region_members));
    }
    throw std::runtime_error("unknown region kind: " + kind);
}

}  // namespace

Json solution_to_json(const CohortSolution& sol) {
    Json j;
    j["method"] = method_name(sol.method);
    j["seed"] = sol.seed;
    j["objective"] = sol.objective_value;
    j["objective_params"] = Json{{"lambda", sol.objective_params.lambda},
                                 {"k_star", sol.objective_params.k_star}};
    j["n_cohorts"] = sol.assignment.n_cohorts;

    auto members = sol.assignment.members();
    Json cohorts = Json::array();
    for (std::size_t c = 0; c < members.size(); ++c) {
        Json jc;
        if (c < sol.assignment.centroids.size())
            jc["centroid"] = sol.assignment.centroids[c];
        else
            jc["centroid"] = nullptr;
        if (c < sol.assignment.centroid_samples.size())
            jc["centroid_sample"] = sol.assignment.centroid_samples[c];
        jc["member_indices"] = members[c];
        jc["explanation"] = scores_json(sol.explanations[c]);
        jc["size"] = members[c].size();
        cohorts.push_back(jc);
    }
    j["cohorts"] = cohorts;

    Json imps = Json::array();
    for (const auto& imp : sol.per_sample) imps.push_back(scores_json(imp));
    j["per_sample_importances"] = imps;

    Json trace = Json::array();
    for (const auto& [iter, obj] : sol.loss_trace) trace.push_back(Json::array({iter, obj}));
    j["loss_trace"] = trace;

    j["region"] = region_to_json(sol.regions);
    j["gale"] = sol.gale;
    if (sol.gale) j["gale_weights"] = sol.gale_feature_weights;
    j["warnings"] = sol.warnings;
    j["timing"] = Json{{"trials", sol.timing.trials},
                       {"mean_inner_iters", sol.timing.mean_inner_iters},
                       {"mean_k", sol.timing.mean_k},
                       {"mean_explainer_ms", sol.timing.mean_explainer_ms}};
    return j;
}

CohortSolution solution_from_json(const Json& j, const Dataset& ds) {
    CohortSolution sol;
    sol.method = method_from_string(j.at("method").get<std::string>());
    sol.seed = j.at("seed").get<std::uint64_t>();
    sol.objective_value = j.at("objective").get<double>();
    sol.objective_params.lambda = j.at("objective_params").at("lambda").get<double>();
    sol.objective_params.k_star = j.at("objective_params").at("k_star").get<int>();

    int n_cohorts = j.at("n_cohorts").get<int>();
    sol.assignment.n_cohorts = n_cohorts;
    sol.assignment.assignment.assign(ds.n_samples(), -1);
    for (std::size_t c = 0; c < j.at("cohorts").size(); ++c) {
        const Json& jc = j.at("cohorts")[c];
        if (!jc.at("centroid").is_null())
            sol.assignment.centroids.push_back(jc.at("centroid").get<std::vector<double>>());
        if (jc.contains("centroid_sample"))
            sol.assignment.centroid_samples.push_back(jc.at("centroid_sample").get<int>());
        for (int i : jc.at("member_indices").get<std::vector<int>>())
            sol.assignment.assignment[static_cast<std::size_t>(i)] = static_cast<int>(c);
        Importance e;
        e.scores = jc.at("explanation").get<std::vector<double>>();
        sol.explanations.push_back(std::move(e));
    }
    for (const auto& ji : j.at("per_sample_importances")) {
        Importance imp;
        imp.scores = ji.get<std::vector<double>>();
        sol.per_sample.push_back(std::move(imp));
    }
    for (const auto& jt : j.at("loss_trace"))
        sol.loss_trace.emplace_back(jt[0].get<int>(), jt[1].get<double>());
    sol.gale = j.at("gale").get<bool>();
    if (sol.gale) sol.gale_feature_weights = j.at("gale_weights").get<std::vector<double>>();
    sol.warnings = j.at("warnings").get<std::vector<std::string>>();
    const Json& jt = j.at("timing");
    sol.timing.trials = jt.at("trials").get<int>();
    sol.timing.mean_inner_iters = jt.at("mean_inner_iters").get<double>();
    sol.timing.mean_k = jt.at("mean_k").get<double>();
    sol.timing.mean_explainer_ms = jt.at("mean_explainer_ms").get<double>();
    sol.regions = region_from_json(j.at("region"), sol, ds);
    return sol;
}

Json metric_report_to_json(const MetricReport& m) {
    Json j;
    j["generalizability"] = m.generalizability;
    j["clustering_penalty"] = m.objective_value;
    Json loc = Json::array();
    for (const auto& pt : m.locality)
        loc.push_back(Json{{"p", pt.p}, {"value", pt.value}, {"stderr", pt.stderr_value}});
    j["locality"] = loc;
    j["locality_summary"] = m.locality_summary;
    j["locality_summary_stderr"] = m.locality_summary_stderr;
    j["cohort_stability"] = m.cohort_stability;
    j["cohort_stability_mean"] = m.cohort_stability_mean;
    j["importance_stability"] = m.importance_stability;
    j["importance_stability_stderr"] = m.importance_stability_stderr;
    j["disjoint"] = m.disjoint;
    j["repeats"] = m.repeats;
    j["stability_runs"] = m.stability_runs;
    j["draws"] = m.draws;
    j["seed"] = m.seed;
    j["warnings"] = m.warnings;
    return j;
}

std::string metric_csv_header() {
    return "method,clustering_penalty,generalizability,disjoint,locality,locality_stderr,"
           "cohort_stability,cohort_stability_mean,importance_stability,"
           "importance_stability_stderr\n";
}

std::string metric_csv_row(const std::string& method, const MetricReport& m) {
    std::string row = method;
    row += ',' + format_double(m.objective_value);
    row += ',' + format_double(m.generalizability);
    row += m.disjoint ? ",true" : ",false";
    row += ',' + format_double(m.locality_summary);
    row += ',' + format_double(m.locality_summary_stderr);
    row += ',' + format_double(m.cohort_stability);
    row += ',' + format_double(m.cohort_stability_mean);
    row += ',' + format_double(m.importance_stability);
    row += ',' + format_double(m.importance_stability_stderr);
    row += '\n';
    return row;
}

void strip_volatile_fields(Json& j) {
    if (j.is_object()) {
        if (j.contains("timing") && j["timing"].is_object())
            j["timing"].erase("mean_explainer_ms");
        for (auto& [key, value] : j.items()) strip_volatile_fields(value);
    } else if (j.is_array()) {
        for (auto& value : j) strip_volatile_fields(value);
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing file: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace cohex
