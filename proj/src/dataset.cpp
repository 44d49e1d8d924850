#include "cohex/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cohex/rng.hpp"

namespace cohex {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void finalize_stats(Dataset& ds) {
    const std::size_t n = ds.n_samples();
    const std::size_t d = ds.features.empty() ? ds.meta.size() : ds.features[0].size();
    ds.scaling.mean.assign(d, 0.0);
    ds.scaling.stddev.assign(d, 1.0);
    if (n == 0) return;
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0, sum2 = 0.0;
        double lo = ds.features[0][j], hi = ds.features[0][j];
        for (std::size_t i = 0; i < n; ++i) {
            double v = ds.features[i][j];
            sum += v;
            sum2 += v * v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        double mean = sum / static_cast<double>(n);
        double var = sum2 / static_cast<double>(n) - mean * mean;
        ds.scaling.mean[j] = mean;
        ds.scaling.stddev[j] = var > 0.0 ? std::sqrt(var) : 1.0;
        if (j < ds.meta.size() && ds.meta[j].kind == FeatureKind::Continuous) {
            ds.meta[j].range_min = lo;
            ds.meta[j].range_max = hi;
        }
    }
}

Dataset subset(const Dataset& ds, const std::vector<int>& rows) {
    Dataset out;
    out.label_kind = ds.label_kind;
    out.n_classes = ds.n_classes;
    out.meta = ds.meta;
    out.features.reserve(rows.size());
    for (int r : rows) {
        out.features.push_back(ds.features[static_cast<std::size_t>(r)]);
        if (ds.has_labels()) out.labels.push_back(ds.labels[static_cast<std::size_t>(r)]);
    }
    finalize_stats(out);
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_number(const std::string& cell, std::size_t row, const std::string& col) {
    double v = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw std::runtime_error("non-numeric value '" + cell + "' in column '" + col +
                                 "' at data row " + std::to_string(row + 1));
    }
    return v;
}

LabelKind detect_label_kind(const std::vector<double>& labels, int& n_classes) {
    std::set<double> distinct;
    bool integral = true;
    double max_v = 0.0;
    for (double v : labels) {
        if (v < 0.0 || std::abs(v - std::round(v)) > 1e-9) integral = false;
        distinct.insert(v);
        max_v = std::max(max_v, v);
    }
    if (integral && distinct.size() <= 16) {
        n_classes = static_cast<int>(std::llround(max_v)) + 1;
        return LabelKind::ClassIndex;
    }
    n_classes = 0;
    return LabelKind::Real;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::vector<std::string>& categorical_columns, LabelKind label_hint) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    std::vector<std::string> header = split_csv_line(line);
    if (header.empty()) throw std::runtime_error("empty header in " + path);

    auto col_index = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw std::runtime_error("missing column '" + name + "' in " + path);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t target_idx = col_index(target_column);
    std::set<std::size_t> categorical_idx;
    for (const auto& name : categorical_columns) {
        std::size_t idx = col_index(name);
        if (idx == target_idx)
            throw std::runtime_error("target column cannot be categorical: " + name);
        categorical_idx.insert(idx);
    }

    std::vector<std::vector<std::string>> raw_rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("row " + std::to_string(raw_rows.size() + 1) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        }
        raw_rows.push_back(std::move(cells));
    }
    if (raw_rows.empty()) throw std::runtime_error("no data rows in " + path);

    // Collect categorical levels, sorted for a deterministic encoding.
    std::vector<std::vector<std::string>> levels(header.size());
    for (std::size_t c : categorical_idx) {
        std::set<std::string> uniq;
        for (const auto& row : raw_rows) uniq.insert(row[c]);
        levels[c].assign(uniq.begin(), uniq.end());
    }

    Dataset ds;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == target_idx) continue;
        if (categorical_idx.count(c)) {
            for (const auto& lv : levels[c]) {
                FeatureMeta m;
                m.name = header[c] + "=" + lv;
                m.kind = FeatureKind::Categorical;
                m.levels = levels[c];
                m.level = lv;
                ds.meta.push_back(std::move(m));
            }
        } else {
            FeatureMeta m;
            m.name = header[c];
            m.kind = FeatureKind::Continuous;
            ds.meta.push_back(std::move(m));
        }
    }

    for (std::size_t r = 0; r < raw_rows.size(); ++r) {
        const auto& row = raw_rows[r];
        std::vector<double> x;
        x.reserve(ds.meta.size());
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == target_idx) continue;
            if (categorical_idx.count(c)) {
                for (const auto& lv : levels[c]) x.push_back(row[c] == lv ? 1.0 : 0.0);
            } else {
                x.push_back(parse_number(row[c], r, header[c]));
            }
        }
        ds.features.push_back(std::move(x));
        ds.labels.push_back(parse_number(row[target_idx], r, target_column));
    }

    if (label_hint == LabelKind::None) {
        ds.label_kind = detect_label_kind(ds.labels, ds.n_classes);
    } else {
        ds.label_kind = label_hint;
        if (label_hint == LabelKind::ClassIndex) {
            double max_v = 0.0;
            for (double v : ds.labels) max_v = std::max(max_v, v);
            ds.n_classes = static_cast<int>(std::llround(max_v)) + 1;
        }
    }
    finalize_stats(ds);
    return ds;
}

double patient_risk_score(double age, double family) {
    double a = age / 100.0;
    double h = 0.75 * family;
    return 4.0 * a * a + h * h;
}

Dataset generate_patients(const PatientGenConfig& cfg) {
    if (cfg.n < 1) throw std::invalid_argument("generate_patients: n must be >= 1");
    if (cfg.flip_prob < 0.0 || cfg.flip_prob > 1.0)
        throw std::invalid_argument("generate_patients: flip_prob must be in [0, 1]");

    static const std::vector<double> kDecadeProbs = {0.14, 0.15, 0.14, 0.15, 0.15,
                                                     0.11, 0.07, 0.06, 0.02, 0.01};
    Rng rng(seed_combine({cfg.seed, 0x706174ULL}));

    Dataset ds;
    ds.meta.resize(2);
    ds.meta[0].name = "age";
    ds.meta[1].name = "family";
    ds.label_kind = LabelKind::ClassIndex;
    ds.n_classes = 2;
    ds.features.reserve(cfg.n);
    ds.labels.reserve(cfg.n);

    for (std::size_t i = 0; i < cfg.n; ++i) {
        double decade = static_cast<double>(rng.discrete(kDecadeProbs));
        double age = 10.0 * decade + rng.uniform(0.0, 10.0);
        double family = rng.uniform();
        int label = patient_risk_score(age, family) >= cfg.boundary_level ? 1 : 0;
        if (rng.uniform() < cfg.flip_prob) label = 1 - label;
        ds.features.push_back({age, family});
        ds.labels.push_back(static_cast<double>(label));
    }
    finalize_stats(ds);
    return ds;
}

double standardized_distance(const std::vector<double>& a, const std::vector<double>& b,
                             const Scaling& scaling) {
    if (a.size() != b.size() || a.size() != scaling.stddev.size())
        throw std::invalid_argument("standardized_distance: dimension mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double z = (a[j] - b[j]) / scaling.stddev[j];
        acc += z * z;
    }
    return std::sqrt(acc);
}

double standardized_distance(const std::vector<double>& a, const std::vector<double>& b,
                             const Dataset& ds) {
    return standardized_distance(a, b, ds.scaling);
}

std::string dataset_to_csv(const Dataset& ds, const std::string& label_name) {
    std::string out;
    for (std::size_t j = 0; j < ds.meta.size(); ++j) {
        if (j) out += ',';
        out += ds.meta[j].name;
    }
    if (ds.has_labels()) {
        if (!ds.meta.empty()) out += ',';
        out += label_name;
    }
    out += '\n';
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        for (std::size_t j = 0; j < ds.features[i].size(); ++j) {
            if (j) out += ',';
            out += format_double(ds.features[i][j]);
        }
        if (ds.has_labels()) {
            out += ',';
            if (ds.label_kind == LabelKind::ClassIndex)
                out += std::to_string(static_cast<long long>(std::llround(ds.labels[i])));
            else
                out += format_double(ds.labels[i]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace cohex
