#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cohex/metrics.hpp"
#include "cohex/solution.hpp"

namespace cohex {

using Json = nlohmann::ordered_json;

// 64-bit FNV-1a over raw bytes; content hashes embedded in reports.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

Json explainer_config_to_json(const ExplainerConfig& cfg);
ExplainerConfig explainer_config_from_json(const Json& j);

// Solution payload of report.json: cohorts (centroid, member indices,
// explanation, size), per-sample importances, loss trace, region geometry,
// timing. Membership regions are rebuilt from member indices on load.
Json solution_to_json(const CohortSolution& sol);
CohortSolution solution_from_json(const Json& j, const Dataset& ds);

Json metric_report_to_json(const MetricReport& m);

// metrics.csv rows; columns are a superset of the benchmark table
// (clustering penalty, closed cohorts, locality, both stability criteria).
std::string metric_csv_header();
std::string metric_csv_row(const std::string& method, const MetricReport& m);

// Drops wall-clock fields (timing.mean_explainer_ms) so outputs can be
// compared byte-for-byte across runs.
void strip_volatile_fields(Json& j);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace cohex
