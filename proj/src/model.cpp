#include "cohex/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cohex/rng.hpp"

namespace cohex {

using json = nlohmann::ordered_json;

int Prediction::predicted_class() const {
    int best = 0;
    for (std::size_t c = 1; c < class_probs.size(); ++c) {
        if (class_probs[c] > class_probs[static_cast<std::size_t>(best)])
            best = static_cast<int>(c);
    }
    return best;
}

int DecisionTree::route(const std::vector<double>& x) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    return node;
}

Prediction TreeEnsembleModel::predict(const std::vector<double>& x) const {
    Prediction out;
    out.task = task_;
    if (task_ == Task::Classification) {
        out.class_probs.assign(static_cast<std::size_t>(n_classes_), 0.0);
        for (const auto& tree : trees_) {
            const TreeNode& leaf = tree.nodes[static_cast<std::size_t>(tree.route(x))];
            for (std::size_t c = 0; c < out.class_probs.size(); ++c)
                out.class_probs[c] += leaf.leaf_probs[c];
        }
        for (double& p : out.class_probs) p /= static_cast<double>(trees_.size());
    } else {
        double sum = 0.0;
        for (const auto& tree : trees_)
            sum += tree.nodes[static_cast<std::size_t>(tree.route(x))].leaf_value;
        out.value = sum / static_cast<double>(trees_.size());
    }
    return out;
}

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double child_impurity = 0.0;  // weighted sum over both children
};

double gini(const std::vector<double>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double acc = 1.0;
    for (double c : counts) {
        double p = c / total;
        acc -= p * p;
    }
    return acc;
}

// Weighted Gini (classification) or SSE (regression) of a node's samples.
double node_impurity(const Dataset& ds, const std::vector<int>& idx, int n_classes,
                     bool classification) {
    if (classification) {
        std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
        for (int i : idx) counts[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])] += 1.0;
        return gini(counts, static_cast<double>(idx.size())) * static_cast<double>(idx.size());
    }
    double sum = 0.0, sum2 = 0.0;
    for (int i : idx) {
        double y = ds.labels[static_cast<std::size_t>(i)];
        sum += y;
        sum2 += y * y;
    }
    return sum2 - sum * sum / static_cast<double>(idx.size());
}

SplitChoice best_split(const Dataset& ds, const std::vector<int>& idx, int n_classes,
                       bool classification, int min_leaf) {
    SplitChoice best;
    const std::size_t n = idx.size();
    const std::size_t d = ds.n_features();
    std::vector<int> order(idx);
    for (std::size_t f = 0; f < d; ++f) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            double va = ds.features[static_cast<std::size_t>(a)][f];
            double vb = ds.features[static_cast<std::size_t>(b)][f];
            return va < vb || (va == vb && a < b);
        });
        // prefix statistics in sorted order
        std::vector<double> left_counts;
        double left_sum = 0.0, left_sum2 = 0.0;
        double total_sum = 0.0, total_sum2 = 0.0;
        std::vector<double> total_counts;
        if (classification) {
            left_counts.assign(static_cast<std::size_t>(n_classes), 0.0);
            total_counts.assign(static_cast<std::size_t>(n_classes), 0.0);
            for (int i : order)
                total_counts[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])] += 1.0;
        } else {
            for (int i : order) {
                double y = ds.labels[static_cast<std::size_t>(i)];
                total_sum += y;
                total_sum2 += y * y;
            }
        }
        for (std::size_t pos = 0; pos + 1 < n; ++pos) {
            int i = order[pos];
            if (classification) {
                left_counts[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])] += 1.0;
            } else {
                double y = ds.labels[static_cast<std::size_t>(i)];
                left_sum += y;
                left_sum2 += y * y;
            }
            double v = ds.features[static_cast<std::size_t>(i)][f];
            double v_next = ds.features[static_cast<std::size_t>(order[pos + 1])][f];
            if (v == v_next) continue;  // only distinct-value midpoints
            std::size_t n_left = pos + 1, n_right = n - n_left;
            if (n_left < static_cast<std::size_t>(min_leaf) ||
                n_right < static_cast<std::size_t>(min_leaf))
                continue;
            double impurity;
            if (classification) {
                std::vector<double> right_counts(left_counts.size());
                for (std::size_t c = 0; c < left_counts.size(); ++c)
                    right_counts[c] = total_counts[c] - left_counts[c];
                impurity = gini(left_counts, static_cast<double>(n_left)) *
                               static_cast<double>(n_left) +
                           gini(right_counts, static_cast<double>(n_right)) *
                               static_cast<double>(n_right);
            } else {
                double right_sum = total_sum - left_sum;
                double right_sum2 = total_sum2 - left_sum2;
                double sse_l = left_sum2 - left_sum * left_sum / static_cast<double>(n_left);
                double sse_r = right_sum2 - right_sum * right_sum / static_cast<double>(n_right);
                impurity = sse_l + sse_r;
            }
            double threshold = 0.5 * (v + v_next);
            if (!best.found || impurity < best.child_impurity - 1e-15) {
                best.found = true;
                best.feature = static_cast<int>(f);
                best.threshold = threshold;
                best.child_impurity = impurity;
            }
        }
    }
    return best;
}

TreeNode make_leaf(const Dataset& ds, const std::vector<int>& idx, int n_classes,
                   bool classification) {
    TreeNode leaf;
    if (classification) {
        leaf.leaf_probs.assign(static_cast<std::size_t>(n_classes), 0.0);
        for (int i : idx)
            leaf.leaf_probs[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])] += 1.0;
        for (double& p : leaf.leaf_probs) p /= static_cast<double>(idx.size());
    } else {
        double sum = 0.0;
        for (int i : idx) sum += ds.labels[static_cast<std::size_t>(i)];
        leaf.leaf_value = sum / static_cast<double>(idx.size());
    }
    return leaf;
}

int grow(DecisionTree& tree, const Dataset& ds, std::vector<int> idx, int depth, int max_depth,
         int min_leaf, int n_classes, bool classification) {
    double impurity = node_impurity(ds, idx, n_classes, classification);
    SplitChoice split;
    if (depth < max_depth && idx.size() >= 2 * static_cast<std::size_t>(min_leaf) &&
        impurity > 1e-12) {
        split = best_split(ds, idx, n_classes, classification, min_leaf);
        if (split.found && impurity - split.child_impurity <= 1e-12) split.found = false;
    }
    int self = static_cast<int>(tree.nodes.size());
    if (!split.found) {
        tree.nodes.push_back(make_leaf(ds, idx, n_classes, classification));
        return self;
    }
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(self)].feature = split.feature;
    tree.nodes[static_cast<std::size_t>(self)].threshold = split.threshold;
    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
        if (ds.features[static_cast<std::size_t>(i)][static_cast<std::size_t>(split.feature)] <=
            split.threshold)
            left_idx.push_back(i);
        else
            right_idx.push_back(i);
    }
    int l = grow(tree, ds, std::move(left_idx), depth + 1, max_depth, min_leaf, n_classes,
                 classification);
    int r = grow(tree, ds, std::move(right_idx), depth + 1, max_depth, min_leaf, n_classes,
                 classification);
    tree.nodes[static_cast<std::size_t>(self)].left = l;
    tree.nodes[static_cast<std::size_t>(self)].right = r;
    return self;
}

DecisionTree fit_tree(const Dataset& ds, const std::vector<int>& idx, int max_depth,
                      int min_leaf, int n_classes, bool classification) {
    DecisionTree tree;
    grow(tree, ds, idx, 0, max_depth, min_leaf, n_classes, classification);
    return tree;
}

void check_training_inputs(const Dataset& ds, int max_depth, int min_leaf) {
    if (!ds.has_labels()) throw std::invalid_argument("training requires a labeled dataset");
    if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
    if (min_leaf < 1) throw std::invalid_argument("min_leaf must be >= 1");
    if (static_cast<std::size_t>(min_leaf) > ds.n_samples())
        throw std::invalid_argument("min_leaf exceeds the number of samples");
}

}  // namespace

std::shared_ptr<TreeEnsembleModel> train_cart(const Dataset& ds, int max_depth, int min_leaf) {
    check_training_inputs(ds, max_depth, min_leaf);
    bool classification = ds.label_kind == LabelKind::ClassIndex;
    std::vector<int> idx(ds.n_samples());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<DecisionTree> trees;
    trees.push_back(fit_tree(ds, idx, max_depth, min_leaf, ds.n_classes, classification));
    return std::make_shared<TreeEnsembleModel>(
        classification ? Task::Classification : Task::Regression, ds.n_classes,
        std::move(trees));
}

std::shared_ptr<TreeEnsembleModel> train_forest(const Dataset& ds, int n_trees, int max_depth,
                                                int min_leaf, std::uint64_t seed) {
    check_training_inputs(ds, max_depth, min_leaf);
    if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
    bool classification = ds.label_kind == LabelKind::ClassIndex;
    std::vector<DecisionTree> trees;
    trees.reserve(static_cast<std::size_t>(n_trees));
    const std::size_t n = ds.n_samples();
    for (int t = 0; t < n_trees; ++t) {
        Rng rng(seed_combine({seed, static_cast<std::uint64_t>(t)}));
        std::vector<int> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(rng.uniform_index(n));
        std::sort(idx.begin(), idx.end());
        trees.push_back(fit_tree(ds, idx, max_depth, min_leaf, ds.n_classes, classification));
    }
    return std::make_shared<TreeEnsembleModel>(
        classification ? Task::Classification : Task::Regression, ds.n_classes,
        std::move(trees));
}

std::string TreeEnsembleModel::to_json() const {
    json doc;
    doc["task"] = task_ == Task::Classification ? "classification" : "regression";
    if (task_ == Task::Classification) doc["n_classes"] = n_classes_;
    json jtrees = json::array();
    for (const auto& tree : trees_) {
        json jnodes = json::array();
        for (const auto& nd : tree.nodes) {
            if (nd.is_leaf()) {
                json leaf;
                if (task_ == Task::Classification)
                    leaf["probs"] = nd.leaf_probs;
                else
                    leaf["value"] = nd.leaf_value;
                jnodes.push_back(json{{"leaf", leaf}});
            } else {
                jnodes.push_back(json{{"feature", nd.feature},
                                      {"threshold", nd.threshold},
                                      {"left", nd.left},
                                      {"right", nd.right}});
            }
        }
        jtrees.push_back(json{{"nodes", jnodes}});
    }
    doc["trees"] = jtrees;
    return doc.dump(2) + "\n";
}

std::shared_ptr<TreeEnsembleModel> TreeEnsembleModel::from_json(const std::string& text) {
    json doc = json::parse(text);
    Task task = doc.at("task").get<std::string>() == "classification" ? Task::Classification
                                                                      : Task::Regression;
    int n_classes = task == Task::Classification ? doc.at("n_classes").get<int>() : 0;
    std::vector<DecisionTree> trees;
    for (const auto& jt : doc.at("trees")) {
        DecisionTree tree;
        for (const auto& jn : jt.at("nodes")) {
            TreeNode nd;
            if (jn.contains("leaf")) {
                const auto& leaf = jn.at("leaf");
                if (task == Task::Classification)
                    nd.leaf_probs = leaf.at("probs").get<std::vector<double>>();
                else
                    nd.leaf_value = leaf.at("value").get<double>();
            } else {
                nd.feature = jn.at("feature").get<int>();
                nd.threshold = jn.at("threshold").get<double>();
                nd.left = jn.at("left").get<int>();
                nd.right = jn.at("right").get<int>();
            }
            tree.nodes.push_back(std::move(nd));
        }
        trees.push_back(std::move(tree));
    }
    return std::make_shared<TreeEnsembleModel>(task, n_classes, std::move(trees));
}

KnnRegressor::KnnRegressor(const Dataset& ds, int k)
    : points_(ds.features), labels_(ds.labels), scaling_(ds.scaling), k_(k) {
    if (!ds.has_labels()) throw std::invalid_argument("knn requires labels");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
}

Prediction KnnRegressor::predict(const std::vector<double>& x) const {
    std::vector<std::pair<double, int>> dist;
    dist.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i)
        dist.emplace_back(standardized_distance(x, points_[i], scaling_), static_cast<int>(i));
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        sum += labels_[static_cast<std::size_t>(dist[i].second)];
    Prediction out;
    out.task = Task::Regression;
    out.value = sum / static_cast<double>(k);
    return out;
}

RandomizedCohortModel::RandomizedCohortModel(std::shared_ptr<const BlackBoxModel> base,
                                             CohortRegions regions, int cohort, double p,
                                             std::vector<double> label_pool,
                                             std::uint64_t stream_seed)
    : base_(std::move(base)),
      regions_(std::move(regions)),
      cohort_(cohort),
      p_(p),
      label_pool_(std::move(label_pool)),
      stream_seed_(stream_seed) {}

Prediction RandomizedCohortModel::predict(const std::vector<double>& x) const {
    if (regions_.contains(cohort_, x)) return base_->predict(x);
    Rng rng(seed_combine({stream_seed_, counter_++}));
    if (rng.uniform() >= p_) return base_->predict(x);
    Prediction out;
    out.task = base_->task();
    if (out.task == Task::Classification) {
        int nc = base_->n_classes();
        out.class_probs.assign(static_cast<std::size_t>(nc), 0.0);
        out.class_probs[rng.uniform_index(static_cast<std::size_t>(nc))] = 1.0;
    } else {
        out.value = label_pool_[rng.uniform_index(label_pool_.size())];
    }
    return out;
}

std::shared_ptr<RandomizedCohortModel> make_randomized(std::shared_ptr<const BlackBoxModel> base,
                                                       CohortRegions regions, int cohort,
                                                       double p, std::vector<double> label_pool,
                                                       std::uint64_t stream_seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("make_randomized: p must be in [0, 1]");
    if (label_pool.empty()) throw std::invalid_argument("make_randomized: empty label pool");
    return std::make_shared<RandomizedCohortModel>(std::move(base), std::move(regions), cohort,
                                                   p, std::move(label_pool), stream_seed);
}

}  // namespace cohex
