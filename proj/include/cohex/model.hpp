#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cohex/dataset.hpp"
#include "cohex/region.hpp"

namespace cohex {

enum class Task { Classification, Regression };

struct Prediction {
    Task task = Task::Regression;
    std::vector<double> class_probs;  // classification only
    double value = 0.0;               // regression only

    int predicted_class() const;  // argmax, ties to the lowest index
    // Scalar view used by explainers: P(class c) or the regression value.
    double scalar(int c) const {
        return task == Task::Classification ? class_probs[static_cast<std::size_t>(c)] : value;
    }
};

// Opaque predictor. Implementations must be pure: the same input always
// yields the same output (randomized wrappers draw from an explicit
// replayable stream instead).
class BlackBoxModel {
public:
    virtual ~BlackBoxModel() = default;
    virtual Prediction predict(const std::vector<double>& x) const = 0;
    virtual Task task() const = 0;
    virtual int n_classes() const = 0;  // 0 for regression
};

struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> leaf_probs;  // classification leaves
    double leaf_value = 0.0;         // regression leaves
    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // node 0 is the root
    int route(const std::vector<double>& x) const;
};

// CART tree or bagged ensemble of CARTs; prediction is the averaged class
// distribution (classification) or the mean of tree outputs (regression).
class TreeEnsembleModel : public BlackBoxModel {
public:
    TreeEnsembleModel(Task task, int n_classes, std::vector<DecisionTree> trees)
        : task_(task), n_classes_(n_classes), trees_(std::move(trees)) {}

    Prediction predict(const std::vector<double>& x) const override;
    Task task() const override { return task_; }
    int n_classes() const override { return n_classes_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }

    std::string to_json() const;
    static std::shared_ptr<TreeEnsembleModel> from_json(const std::string& text);

private:
    Task task_;
    int n_classes_;
    std::vector<DecisionTree> trees_;
};

// Greedy axis-aligned CART. Gini impurity for classification, variance for
// regression; split candidates are midpoints of consecutive distinct sorted
// values, ties broken by lowest feature index then lowest threshold.
std::shared_ptr<TreeEnsembleModel> train_cart(const Dataset& ds, int max_depth,
                                              int min_leaf = 1);

// Bagged CARTs over bootstrap resamples; deterministic given seed.
std::shared_ptr<TreeEnsembleModel> train_forest(const Dataset& ds, int n_trees, int max_depth,
                                                int min_leaf, std::uint64_t seed);

// Mean of the k nearest labels under the dataset's standardized distance.
class KnnRegressor : public BlackBoxModel {
public:
    KnnRegressor(const Dataset& ds, int k);
    Prediction predict(const std::vector<double>& x) const override;
    Task task() const override { return Task::Regression; }
    int n_classes() const override { return 0; }

private:
    std::vector<std::vector<double>> points_;
    std::vector<double> labels_;
    Scaling scaling_;
    int k_;
};

// Wrapper that mirrors the base model inside one cohort region and randomizes
// elsewhere: outside the region the base answer is kept with probability 1-p,
// otherwise a uniformly random class (classification) or a draw from the
// label pool (regression) is returned. The random branch is driven by
// hash(stream_seed, query counter), so a replayed query sequence reproduces
// the exact same outputs.
class RandomizedCohortModel : public BlackBoxModel {
public:
    RandomizedCohortModel(std::shared_ptr<const BlackBoxModel> base, CohortRegions regions,
                          int cohort, double p, std::vector<double> label_pool,
                          std::uint64_t stream_seed);

    Prediction predict(const std::vector<double>& x) const override;
    Task task() const override { return base_->task(); }
    int n_classes() const override { return base_->n_classes(); }
    void reset_stream() { counter_ = 0; }

private:
    std::shared_ptr<const BlackBoxModel> base_;
    CohortRegions regions_;
    int cohort_;
    double p_;
    std::vector<double> label_pool_;
    std::uint64_t stream_seed_;
    mutable std::uint64_t counter_ = 0;  // owned by one evaluation session at a time
};

std::shared_ptr<RandomizedCohortModel> make_randomized(std::shared_ptr<const BlackBoxModel> base,
                                                       CohortRegions regions, int cohort,
                                                       double p, std::vector<double> label_pool,
                                                       std::uint64_t stream_seed);

}  // namespace cohex
