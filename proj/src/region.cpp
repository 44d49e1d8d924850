#include "cohex/region.hpp"

#include <stdexcept>

namespace cohex {

int CohortRegions::cohort_of(const std::vector<double>& x) const {
    switch (kind) {
        case Kind::Centroid: {
            int best = -1;
            double best_dist = 0.0;
            for (std::size_t j = 0; j < centroids.size(); ++j) {
                double d = standardized_distance(x, centroids[j], scaling);
                if (best < 0 || d < best_dist) {
                    best = static_cast<int>(j);
                    best_dist = d;
                }
            }
            return best;
        }
        case Kind::Tree: {
            if (tree.empty()) return -1;
            int node = 0;
            while (!tree[static_cast<std::size_t>(node)].is_leaf()) {
                const RegionTreeNode& nd = tree[static_cast<std::size_t>(node)];
                node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                               : nd.right;
            }
            return tree[static_cast<std::size_t>(node)].leaf_cohort;
        }
        case Kind::Membership: {
            for (std::size_t j = 0; j < members.size(); ++j) {
                for (const auto& m : members[j]) {
                    if (m == x) return static_cast<int>(j);
                }
            }
            return -1;
        }
    }
    return -1;
}

bool CohortRegions::contains(int cohort, const std::vector<double>& x) const {
    if (kind == Kind::Membership) {
        if (cohort < 0 || cohort >= static_cast<int>(members.size())) return false;
        for (const auto& m : members[static_cast<std::size_t>(cohort)]) {
            if (m == x) return true;
        }
        return false;
    }
    return cohort_of(x) == cohort;
}

CohortRegions CohortRegions::from_centroids(std::vector<std::vector<double>> centroids,
                                            Scaling scaling) {
    if (centroids.empty()) throw std::invalid_argument("regions: need at least one centroid");
    CohortRegions r;
    r.kind = Kind::Centroid;
    r.n_cohorts = static_cast<int>(centroids.size());
    r.centroids = std::move(centroids);
    r.scaling = std::move(scaling);
    return r;
}

CohortRegions CohortRegions::from_tree(std::vector<RegionTreeNode> nodes, int n_cohorts) {
    CohortRegions r;
    r.kind = Kind::Tree;
    r.n_cohorts = n_cohorts;
    r.tree = std::move(nodes);
    return r;
}

CohortRegions CohortRegions::from_members(
    std::vector<std::vector<std::vector<double>>> members) {
    CohortRegions r;
    r.kind = Kind::Membership;
    r.n_cohorts = static_cast<int>(members.size());
    r.members = std::move(members);
    return r;
}

}  // namespace cohex
