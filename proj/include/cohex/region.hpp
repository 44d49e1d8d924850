#pragma once

#include <vector>

#include "cohex/dataset.hpp"

namespace cohex {

// Axis-aligned partition tree node; interior nodes route on
// x[feature] <= threshold, leaves carry the cohort index.
struct RegionTreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_cohort = -1;
    bool is_leaf() const { return leaf_cohort >= 0; }
};

// Geometry of a cohort partition, able to answer membership for arbitrary
// query points (explainers sample points that are not dataset rows).
struct CohortRegions {
    enum class Kind { Centroid, Tree, Membership };

    Kind kind = Kind::Centroid;
    int n_cohorts = 0;

    // Centroroid-based: nearest centroid under standardized distance, ties to
    // the lowest index.
    std::vector<std::vector<double>> centroids;
    Scaling scaling;

    // Tree-based (node 0 is the root).
    std::vector<RegionTreeNode> tree;

    // Membership-based: the cohorts are extensional sample lists; only the
    // listed points belong to a cohort.
    std::vector<std::vector<std::vector<double>>> members;

    // Cohort index of x, or -1 (membership-based regions do not cover the
    // whole space).
    int cohort_of(const std::vector<double>& x) const;
    bool contains(int cohort, const std::vector<double>& x) const;

    static CohortRegions from_centroids(std::vector<std::vector<double>> centroids,
                                        Scaling scaling);
    static CohortRegions from_tree(std::vector<RegionTreeNode> nodes, int n_cohorts);
    static CohortRegions from_members(std::vector<std::vector<std::vector<double>>> members);
};

}  // namespace cohex
