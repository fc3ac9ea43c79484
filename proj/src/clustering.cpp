#include "rdplan/clustering.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "rdplan/errors.hpp"

namespace rdplan::clustering {

namespace {

// Weighted mean over members in ascending day-id order. The fixed summation
// order makes repeated recomputation bit-identical, which the deterministic
// tie-breaking relies on.
std::array<double, kFeatureDim> weighted_mean(
    const std::vector<int>& ids, const std::vector<double>& weights,
    const std::unordered_map<int, const scenario::ScenarioEntry*>& by_id) {
    std::array<double, kFeatureDim> acc{};
    double total = 0.0;
    for (size_t i = 0; i < ids.size(); ++i) {
        const auto& f = by_id.at(ids[i])->features;
        for (int j = 0; j < kFeatureDim; ++j) acc[j] += weights[i] * f[j];
        total += weights[i];
    }
    for (int j = 0; j < kFeatureDim; ++j) acc[j] /= total;
    return acc;
}

struct MergeKey {
    int lo;
    int hi;
    bool operator<(const MergeKey& o) const {
        return lo != o.lo ? lo < o.lo : hi < o.hi;
    }
};

MergeKey key_of(const Cluster& a, const Cluster& b) {
    int ma = a.min_day_id();
    int mb = b.min_day_id();
    return {std::min(ma, mb), std::max(ma, mb)};
}

std::unordered_map<int, const scenario::ScenarioEntry*> index_by_day_id(const ScenarioSet& set) {
    std::unordered_map<int, const scenario::ScenarioEntry*> by_id;
    by_id.reserve(set.entries.size());
    for (int i = 0; i < set.size(); ++i) {
        if (set.provenance[i].size() != 1) {
            throw ValidationError(
                "agglomerate: entry " + std::to_string(i) +
                " does not map to a single original day; cluster a full-scale set");
        }
        if (!by_id.emplace(set.provenance[i][0], &set.entries[i]).second) {
            throw ValidationError("agglomerate: duplicate day id " +
                                  std::to_string(set.provenance[i][0]));
        }
    }
    return by_id;
}

}  // namespace

double Cluster::weight() const {
    double w = 0.0;
    for (double x : member_weights) w += x;
    return w;
}

double ward_dist(const Cluster& a, const Cluster& b) {
    const double na = a.size();
    const double nb = b.size();
    double sq = 0.0;
    for (int j = 0; j < kFeatureDim; ++j) {
        const double d = a.mean_features[j] - b.mean_features[j];
        sq += d * d;
    }
    return (2.0 * na * nb / (na + nb)) * sq;
}

Partition agglomerate(const ScenarioSet& set, int k) {
    const int n = set.size();
    if (k < 1 || k > n) {
        throw ValidationError("agglomerate: K=" + std::to_string(k) +
                              " out of range [1," + std::to_string(n) + "]");
    }
    auto by_id = index_by_day_id(set);

    std::vector<Cluster> clusters(n);
    std::vector<bool> active(n, true);
    for (int i = 0; i < n; ++i) {
        clusters[i].member_day_ids = {set.provenance[i][0]};
        clusters[i].member_weights = {set.entries[i].weight};
        clusters[i].mean_features = set.entries[i].features;
    }

    // Pairwise distance cache; only rows touching a merged cluster are redone.
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) dist[i][j] = ward_dist(clusters[i], clusters[j]);

    int remaining = n;
    while (remaining > k) {
        double best = std::numeric_limits<double>::infinity();
        MergeKey best_key{-1, -1};
        int bi = -1, bj = -1;
        for (int i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (int j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                const double d = dist[i][j];
                if (d < best) {
                    best = d;
                    best_key = key_of(clusters[i], clusters[j]);
                    bi = i;
                    bj = j;
                } else if (d == best) {
                    MergeKey cand = key_of(clusters[i], clusters[j]);
                    if (cand < best_key) {
                        best_key = cand;
                        bi = i;
                        bj = j;
                    }
                }
            }
        }

        Cluster& into = clusters[bi];
        Cluster& from = clusters[bj];
        std::vector<int> ids;
        std::vector<double> weights;
        ids.reserve(into.size() + from.size());
        weights.reserve(into.size() + from.size());
        size_t a = 0, b = 0;
        while (a < into.member_day_ids.size() || b < from.member_day_ids.size()) {
            const bool take_a =
                b == from.member_day_ids.size() ||
                (a < into.member_day_ids.size() && into.member_day_ids[a] < from.member_day_ids[b]);
            if (take_a) {
                ids.push_back(into.member_day_ids[a]);
                weights.push_back(into.member_weights[a]);
                ++a;
            } else {
                ids.push_back(from.member_day_ids[b]);
                weights.push_back(from.member_weights[b]);
                ++b;
            }
        }
        into.member_day_ids = std::move(ids);
        into.member_weights = std::move(weights);
        into.mean_features = weighted_mean(into.member_day_ids, into.member_weights, by_id);
        active[bj] = false;
        --remaining;

        for (int i = 0; i < n; ++i) {
            if (!active[i] || i == bi) continue;
            const double d = ward_dist(clusters[std::min(i, bi)], clusters[std::max(i, bi)]);
            dist[std::min(i, bi)][std::max(i, bi)] = d;
        }
    }

    Partition out;
    out.clusters.reserve(k);
    for (int i = 0; i < n; ++i)
        if (active[i]) out.clusters.push_back(std::move(clusters[i]));
    std::sort(out.clusters.begin(), out.clusters.end(),
              [](const Cluster& a, const Cluster& b) { return a.min_day_id() < b.min_day_id(); });
    return out;
}

ScenarioSet make_representatives(const Partition& partition) {
    ScenarioSet out;
    out.kind = scenario::SetKind::Reduced;
    out.entries.reserve(partition.clusters.size());
    out.provenance.reserve(partition.clusters.size());
    for (const auto& c : partition.clusters) {
        if (c.member_day_ids.empty()) {
            throw ValidationError("make_representatives: empty cluster");
        }
        out.entries.push_back({c.weight(), c.mean_features});
        out.provenance.push_back(c.member_day_ids);
    }
    return out;
}

Partition recluster_subset(const ScenarioSet& full, const std::vector<int>& day_ids, int k_sub) {
    if (day_ids.empty()) {
        throw ValidationError("recluster_subset: empty day selection");
    }
    if (k_sub < 1 || k_sub > static_cast<int>(day_ids.size())) {
        throw ValidationError("recluster_subset: K_sub=" + std::to_string(k_sub) +
                              " out of range [1," + std::to_string(day_ids.size()) + "]");
    }
    std::unordered_map<int, int> entry_of_day;
    for (int i = 0; i < full.size(); ++i) {
        if (full.provenance[i].size() == 1) entry_of_day[full.provenance[i][0]] = i;
    }
    ScenarioSet sub;
    sub.kind = full.kind;
    std::vector<int> sorted_ids = day_ids;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    for (int id : sorted_ids) {
        auto it = entry_of_day.find(id);
        if (it == entry_of_day.end()) {
            throw ValidationError("recluster_subset: day id " + std::to_string(id) +
                                  " not present in the source set");
        }
        sub.entries.push_back(full.entries[it->second]);
        sub.provenance.push_back(full.provenance[it->second]);
    }
    return agglomerate(sub, k_sub);
}

}  // namespace rdplan::clustering
