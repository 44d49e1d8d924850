#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cohex {

enum class FeatureKind { Continuous, Categorical };

struct FeatureMeta {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    // Categorical: level names of the source column (the encoded column is the
    // 0/1 indicator of `level`).
    std::vector<std::string> levels;
    std::string level;
    // Continuous: observed range in the data this metadata was computed from.
    double range_min = 0.0;
    double range_max = 0.0;
};

enum class LabelKind { None, ClassIndex, Real };

// Per-column standardization statistics. Population moments; columns with
// zero variance get stddev 1 so they never divide distances by zero.
struct Scaling {
    std::vector<double> mean;
    std::vector<double> stddev;
};

struct Dataset {
    std::vector<std::vector<double>> features;  // n_samples x n_features
    std::vector<double> labels;                 // empty when unlabeled
    LabelKind label_kind = LabelKind::None;
    int n_classes = 0;  // ClassIndex only
    std::vector<FeatureMeta> meta;  // one entry per encoded column
    Scaling scaling;

    std::size_t n_samples() const { return features.size(); }
    std::size_t n_features() const { return features.empty() ? meta.size() : features[0].size(); }
    bool has_labels() const { return label_kind != LabelKind::None; }
};

struct PatientGenConfig {
    std::size_t n = 1;
    std::uint64_t seed = 0;
    double flip_prob = 0.2;
    double boundary_level = 0.4;
};

// Recomputes scaling and continuous observed ranges from the current rows.
void finalize_stats(Dataset& ds);

// Rows of `ds` at `rows`, with scaling and ranges recomputed for the subset.
Dataset subset(const Dataset& ds, const std::vector<int>& rows);

// CSV ingestion. First row is the header; `target_column` becomes the label
// vector; columns named in `categorical_columns` are one-hot encoded (levels
// sorted lexicographically). Throws std::runtime_error on missing file or
// column, non-numeric values in continuous columns, and empty files.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::vector<std::string>& categorical_columns = {},
                 LabelKind label_hint = LabelKind::None);

// Synthetic two-feature patient classification data (columns age, family).
Dataset generate_patients(const PatientGenConfig& cfg);

// Risk score behind the synthetic labels; the positive class is score >= level.
double patient_risk_score(double age, double family);

double standardized_distance(const std::vector<double>& a, const std::vector<double>& b,
                             const Scaling& scaling);
double standardized_distance(const std::vector<double>& a, const std::vector<double>& b,
                             const Dataset& ds);

// Canonical CSV rendering of a dataset (header + full-precision rows). Used
// for file output and content hashing.
std::string dataset_to_csv(const Dataset& ds, const std::string& label_name = "label");

// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

}  // namespace cohex
