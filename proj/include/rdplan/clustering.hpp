#pragma once

#include <array>
#include <vector>

#include "rdplan/scenario.hpp"

namespace rdplan::clustering {

using scenario::kFeatureDim;
using scenario::ScenarioSet;

/// A group of original days with its weighted mean feature vector.
struct Cluster {
    std::vector<int> member_day_ids;      // ascending
    std::vector<double> member_weights;   // parallel to member_day_ids
    std::array<double, kFeatureDim> mean_features{};

    int size() const { return static_cast<int>(member_day_ids.size()); }
    double weight() const;
    int min_day_id() const { return member_day_ids.front(); }
};

/// Disjoint cover of a scenario set's day ids, ordered by smallest member id.
struct Partition {
    std::vector<Cluster> clusters;
};

/// The dissimilarity used for merging: (2|a||b| / (|a|+|b|)) * ||mean_a - mean_b||^2.
double ward_dist(const Cluster& a, const Cluster& b);

/// Agglomerative clustering: start from singletons, repeatedly merge the
/// pair with minimal ward_dist until K clusters remain. Ties are broken by
/// the lexicographically smallest (min day id, other min day id) pair, so
/// results are deterministic.
Partition agglomerate(const ScenarioSet& set, int k);

/// Mean-based representatives: entry k carries the cluster's total weight and
/// the weighted mean of its members' features; provenance keeps the member ids.
ScenarioSet make_representatives(const Partition& partition);

/// Runs agglomerate restricted to the given days of a full set.
Partition recluster_subset(const ScenarioSet& full, const std::vector<int>& day_ids, int k_sub);

}  // namespace rdplan::clustering
