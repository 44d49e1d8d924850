#include "cohex/explainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "cohex/rng.hpp"

namespace cohex {

ExplainerMethod explainer_method_from_string(const std::string& name) {
    if (name == "counterfactual") return ExplainerMethod::Counterfactual;
    if (name == "linear_surrogate" || name == "linear") return ExplainerMethod::LinearSurrogate;
    if (name == "shapley") return ExplainerMethod::Shapley;
    throw std::invalid_argument("unknown explainer method: " + name);
}

std::string explainer_method_name(ExplainerMethod m) {
    switch (m) {
        case ExplainerMethod::Counterfactual: return "counterfactual";
        case ExplainerMethod::LinearSurrogate: return "linear_surrogate";
        case ExplainerMethod::Shapley: return "shapley";
    }
    return "?";
}

namespace {

void check_context(const Dataset& context, const std::vector<double>& x) {
    if (context.n_samples() == 0)
        throw std::invalid_argument("explainer context must be non-empty");
    if (x.size() != context.n_features())
        throw std::invalid_argument("sample dimension does not match context");
}

// Scalar model view: probability of the class predicted at x, or the
// regression value.
struct ScalarModel {
    const BlackBoxModel& model;
    int focus_class = 0;

    explicit ScalarModel(const BlackBoxModel& m, const std::vector<double>& x) : model(m) {
        if (m.task() == Task::Classification) focus_class = m.predict(x).predicted_class();
    }
    double operator()(const std::vector<double>& z) const {
        return model.predict(z).scalar(focus_class);
    }
};

double population_stddev(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double sum = 0.0, sum2 = 0.0;
    for (double x : v) {
        sum += x;
        sum2 += x * x;
    }
    double mean = sum / static_cast<double>(v.size());
    double var = sum2 / static_cast<double>(v.size()) - mean * mean;
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

// Solve A b = y for symmetric positive definite A via Gaussian elimination
// with partial pivoting. A is overwritten.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> y) {
    const std::size_t n = y.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(y[col], y[pivot]);
        double diag = a[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            double factor = a[r][col] / diag;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
            y[r] -= factor * y[col];
        }
    }
    std::vector<double> b(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double acc = y[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * b[c];
        b[r] = acc / a[r][r];
    }
    return b;
}

// Eigenvalue ratio of a symmetric matrix by cyclic Jacobi rotations; good
// enough as a condition estimate for the small normal matrices here.
double symmetric_condition(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                double c = std::cos(theta), s = std::sin(theta);
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = std::abs(a[i][i]);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

Importance explain_counterfactual(const BlackBoxModel& model, const Dataset& context,
                                  const std::vector<double>& x, const ExplainerConfig& cfg) {
    check_context(context, x);
    const std::size_t d = x.size();
    constexpr int kGridSteps = 200;

    const bool classification = model.task() == Task::Classification;
    Prediction base = model.predict(x);
    int base_class = classification ? base.predicted_class() : 0;
    double flip_threshold = 0.0;
    if (!classification) {
        std::vector<double> preds;
        preds.reserve(context.n_samples());
        for (const auto& row : context.features) preds.push_back(model.predict(row).value);
        flip_threshold = cfg.regression_flip_fraction * population_stddev(preds);
    }
    auto flips = [&](const std::vector<double>& z) {
        Prediction p = model.predict(z);
        if (classification) return p.predicted_class() != base_class;
        return std::abs(p.value - base.value) > flip_threshold;
    };

    Importance out;
    out.scores.assign(d, 0.0);
    std::vector<double> z = x;
    for (std::size_t f = 0; f < d; ++f) {
        double lo = context.meta[f].range_min;
        double hi = context.meta[f].range_max;
        double range = hi - lo;
        if (range <= 0.0) continue;  // zero-width feature: importance stays 0
        double step = range / kGridSteps;
        double best = std::numeric_limits<double>::infinity();
        for (int g = 0; g <= kGridSteps; ++g) {
            double v = lo + step * g;
            double delta = std::abs(v - x[f]);
            if (delta == 0.0 || delta >= best) continue;
            z[f] = v;
            if (flips(z)) best = delta;
        }
        z[f] = x[f];
        if (std::isfinite(best)) out.scores[f] = std::max(0.0, (range - best) / range);
    }
    return out;
}

Importance explain_linear_surrogate(const BlackBoxModel& model, const Dataset& context,
                                    const std::vector<double>& x, const ExplainerConfig& cfg) {
    check_context(context, x);
    const std::size_t d = x.size();
    if (cfg.n_perturbations < static_cast<int>(d) + 1)
        throw std::invalid_argument("linear surrogate needs n_perturbations >= n_features + 1");
    if (cfg.kernel_width <= 0.0) throw std::invalid_argument("kernel_width must be > 0");

    ScalarModel scalar(model, x);
    Rng rng(seed_combine({cfg.seed, 0x6c696d65ULL}));
    const std::size_t n = static_cast<std::size_t>(cfg.n_perturbations);
    const std::size_t cols = d + 1;  // intercept first

    // Accumulate the weighted normal equations directly.
    std::vector<std::vector<double>> ata(cols, std::vector<double>(cols, 0.0));
    std::vector<double> aty(cols, 0.0);
    std::vector<double> z(d), row(cols);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < d; ++f)
            z[f] = x[f] + rng.normal() * context.scaling.stddev[f];
        double dist = standardized_distance(z, x, context.scaling);
        double w = std::exp(-(dist * dist) / (cfg.kernel_width * cfg.kernel_width));
        double y = scalar(z);
        row[0] = 1.0;
        for (std::size_t f = 0; f < d; ++f) row[f + 1] = z[f];
        for (std::size_t r = 0; r < cols; ++r) {
            for (std::size_t c = r; c < cols; ++c) ata[r][c] += w * row[r] * row[c];
            aty[r] += w * row[r] * y;
        }
    }
    for (std::size_t r = 0; r < cols; ++r)
        for (std::size_t c = 0; c < r; ++c) ata[r][c] = ata[c][r];
    constexpr double kRidge = 1e-6;
    for (std::size_t r = 0; r < cols; ++r) ata[r][r] += kRidge;

    Importance out;
    out.condition_warning = symmetric_condition(ata) > 1e8;
    std::vector<double> beta = solve_linear(ata, aty);
    out.scores.resize(d);
    for (std::size_t f = 0; f < d; ++f) out.scores[f] = std::abs(beta[f + 1]);
    return out;
}

namespace {

// Exact Shapley by full subset enumeration. Backgrounds: every context row
// when the context has at most 32 rows, otherwise the context mean.
Importance shapley_exact(const ScalarModel& scalar, const Dataset& context,
                         const std::vector<double>& x) {
    const std::size_t d = x.size();
    std::vector<std::vector<double>> backgrounds;
    if (context.n_samples() <= 32) {
        backgrounds = context.features;
    } else {
        backgrounds.push_back(context.scaling.mean);
    }

    const std::size_t n_masks = std::size_t{1} << d;
    std::vector<double> value(n_masks, 0.0);
    std::vector<double> z(d);
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
        double acc = 0.0;
        for (const auto& b : backgrounds) {
            for (std::size_t f = 0; f < d; ++f)
                z[f] = (mask >> f) & 1u ? x[f] : b[f];
            acc += scalar(z);
        }
        value[mask] = acc / static_cast<double>(backgrounds.size());
    }

    std::vector<double> fact(d + 1, 1.0);
    for (std::size_t i = 1; i <= d; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
    Importance out;
    out.scores.assign(d, 0.0);
    for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t mask = 0; mask < n_masks; ++mask) {
            if ((mask >> f) & 1u) continue;
            std::size_t s = static_cast<std::size_t>(std::popcount(mask));
            double weight = fact[s] * fact[d - s - 1] / fact[d];
            out.scores[f] += weight * (value[mask | (std::size_t{1} << f)] - value[mask]);
        }
    }
    return out;
}

Importance shapley_sampled(const ScalarModel& scalar, const Dataset& context,
                           const std::vector<double>& x, const ExplainerConfig& cfg) {
    const std::size_t d = x.size();
    const std::vector<double>& background = context.scaling.mean;
    Rng rng(seed_combine({cfg.seed, 0x73686170ULL}));

    Importance out;
    out.scores.assign(d, 0.0);
    std::vector<int> order(d);
    std::vector<double> z(d);
    for (int s = 0; s < cfg.shapley_samples; ++s) {
        for (std::size_t f = 0; f < d; ++f) order[f] = static_cast<int>(f);
        rng.shuffle(order);
        z = background;
        double prev = scalar(z);
        for (std::size_t pos = 0; pos < d; ++pos) {
            std::size_t f = static_cast<std::size_t>(order[pos]);
            z[f] = x[f];
            double cur = scalar(z);
            out.scores[f] += cur - prev;
            prev = cur;
        }
    }
    for (double& s : out.scores) s /= static_cast<double>(cfg.shapley_samples);
    return out;
}

}  // namespace

Importance explain_shapley(const BlackBoxModel& model, const Dataset& context,
                           const std::vector<double>& x, const ExplainerConfig& cfg) {
    check_context(context, x);
    ScalarModel scalar(model, x);
    if (static_cast<int>(x.size()) <= cfg.exact_shapley_threshold)
        return shapley_exact(scalar, context, x);
    if (cfg.shapley_samples < 1)
        throw std::invalid_argument("shapley_samples must be >= 1");
    return shapley_sampled(scalar, context, x, cfg);
}

Importance explain(const BlackBoxModel& model, const Dataset& context,
                   const std::vector<double>& x, const ExplainerConfig& cfg) {
    switch (cfg.method) {
        case ExplainerMethod::Counterfactual:
            return explain_counterfactual(model, context, x, cfg);
        case ExplainerMethod::LinearSurrogate:
            return explain_linear_surrogate(model, context, x, cfg);
        case ExplainerMethod::Shapley:
            return explain_shapley(model, context, x, cfg);
    }
    throw std::logic_error("unreachable");
}

std::vector<double> gale_weights(const std::vector<Importance>& importances,
                                 const std::vector<int>& predicted_classes) {
    if (importances.size() != predicted_classes.size())
        throw std::invalid_argument("gale: importances and predictions differ in length");
    if (importances.empty()) return {};
    const std::size_t d = importances[0].scores.size();

    std::set<int> present(predicted_classes.begin(), predicted_classes.end());
    if (present.size() <= 1) return std::vector<double>(d, 1.0);
    std::vector<int> classes(present.begin(), present.end());
    const std::size_t n_cls = classes.size();

    // class-conditional mean absolute importance per feature
    std::vector<std::vector<double>> mass(n_cls, std::vector<double>(d, 0.0));
    std::vector<double> counts(n_cls, 0.0);
    for (std::size_t i = 0; i < importances.size(); ++i) {
        std::size_t c = static_cast<std::size_t>(
            std::find(classes.begin(), classes.end(), predicted_classes[i]) - classes.begin());
        counts[c] += 1.0;
        for (std::size_t f = 0; f < d; ++f) mass[c][f] += std::abs(importances[i].scores[f]);
    }
    for (std::size_t c = 0; c < n_cls; ++c)
        for (std::size_t f = 0; f < d; ++f) mass[c][f] /= counts[c];

    std::vector<double> homogeneity(d, 0.0);
    const double log_c = std::log(static_cast<double>(n_cls));
    for (std::size_t f = 0; f < d; ++f) {
        double total = 0.0;
        for (std::size_t c = 0; c < n_cls; ++c) total += mass[c][f];
        if (total <= 0.0) {
            homogeneity[f] = 0.0;  // feature carries no importance mass at all
            continue;
        }
        double entropy = 0.0;
        for (std::size_t c = 0; c < n_cls; ++c) {
            double q = mass[c][f] / total;
            if (q > 0.0) entropy -= q * std::log(q);
        }
        homogeneity[f] = 1.0 - entropy / log_c;
    }

    double lo = *std::min_element(homogeneity.begin(), homogeneity.end());
    double hi = *std::max_element(homogeneity.begin(), homogeneity.end());
    std::vector<double> weights(d, 1.0);
    if (hi > lo) {
        for (std::size_t f = 0; f < d; ++f) weights[f] = (homogeneity[f] - lo) / (hi - lo);
    }
    return weights;
}

std::vector<Importance> gale_reweight(const std::vector<Importance>& importances,
                                      const std::vector<int>& predicted_classes) {
    std::vector<double> weights = gale_weights(importances, predicted_classes);
    std::vector<Importance> out = importances;
    for (auto& imp : out)
        for (std::size_t f = 0; f < imp.scores.size(); ++f) imp.scores[f] *= weights[f];
    return out;
}

}  // namespace cohex
