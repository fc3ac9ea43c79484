#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rdplan::testsupport {

using scenario::DayProfile;
using scenario::kHoursPerDay;
using sysmodel::SystemModel;

DayProfile flat_day(double load_factor, double wind_factor, int day_id, double weight) {
    DayProfile d;
    d.day_id = day_id;
    d.weight = weight;
    d.load_factors.fill(load_factor);
    d.wind_factors.fill(wind_factor);
    return d;
}

SystemModel one_bus_system(double marginal_cost, double p_max, double peak_load, double voll,
                           double ramp) {
    SystemModel m;
    m.buses = {1};
    m.thermal_units.push_back({1, 0.0, p_max, marginal_cost, ramp});
    m.loads.push_back({1, peak_load});
    m.voll = voll;
    m.curtail_price = 0.0;
    m.reference_bus = 1;
    return m;
}

SystemModel two_bus_system() {
    SystemModel m;
    m.buses = {1, 2};
    m.existing_lines.push_back({1, 2, 100.0, 30.0, 0.0});
    m.thermal_units.push_back({1, 0.0, 200.0, 5.0, 500.0});
    m.thermal_units.push_back({2, 0.0, 200.0, 50.0, 500.0});
    m.loads.push_back({2, 100.0});
    m.voll = 1000.0;
    m.curtail_price = 0.0;
    m.reference_bus = 1;
    return m;
}

namespace {

double diurnal(int t) {
    // Smooth daily hump peaking mid-afternoon.
    return 0.5 * (1.0 - std::cos(2.0 * M_PI * (t - 4.0) / 24.0));
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

DayProfile mild_day(Rng& rng, int day_id) {
    DayProfile d;
    d.day_id = day_id;
    d.weight = 1.0;
    const double base = rng.uniform(0.30, 0.45);
    const double amp = rng.uniform(0.15, 0.25);
    const double wind_base = rng.uniform(0.35, 0.70);
    const double phase = rng.uniform(0.0, 24.0);
    for (int t = 0; t < kHoursPerDay; ++t) {
        d.load_factors[t] = clamp01(base + amp * diurnal(t) + rng.uniform(-0.02, 0.02));
        d.wind_factors[t] = clamp01(wind_base + 0.2 * std::sin(2.0 * M_PI * (t + phase) / 24.0) +
                                    rng.uniform(-0.05, 0.05));
    }
    return d;
}

DayProfile peak_day(Rng& rng, int day_id) {
    DayProfile d;
    d.day_id = day_id;
    d.weight = 1.0;
    const double base = rng.uniform(0.72, 0.80);
    const double amp = rng.uniform(0.18, 0.25);
    for (int t = 0; t < kHoursPerDay; ++t) {
        d.load_factors[t] = clamp01(base + amp * diurnal(t) + rng.uniform(-0.01, 0.01));
        d.wind_factors[t] = clamp01(rng.uniform(0.03, 0.12));
    }
    return d;
}

}  // namespace

std::vector<DayProfile> synthetic_days(int n_mild, int n_peak, std::uint64_t seed) {
    Rng rng(seed);
    const int n = n_mild + n_peak;
    // Spread the peak days over the horizon rather than bunching them.
    std::vector<bool> is_peak(n, false);
    int placed = 0;
    while (placed < n_peak) {
        const int pos = rng.integer(0, n - 1);
        if (!is_peak[pos]) {
            is_peak[pos] = true;
            ++placed;
        }
    }
    std::vector<DayProfile> days;
    days.reserve(n);
    for (int i = 0; i < n; ++i) {
        days.push_back(is_peak[i] ? peak_day(rng, i) : mild_day(rng, i));
    }
    return days;
}

SystemModel coastal_3bus() {
    SystemModel m;
    m.buses = {1, 2, 3};
    m.existing_lines.push_back({1, 2, 200.0, 120.0, 0.0});
    m.existing_lines.push_back({2, 3, 200.0, 70.0, 0.0});
    m.thermal_units.push_back({1, 0.0, 160.0, 12.0, 70.0});
    m.thermal_units.push_back({3, 0.0, 90.0, 55.0, 45.0});
    m.candidate_lines.push_back({1, 3, 200.0, 90.0, 26000.0});
    m.candidate_wind.push_back({3, 70.0, 21000.0});
    m.candidate_wind.push_back({2, 50.0, 30000.0});
    m.loads.push_back({2, 80.0});
    m.loads.push_back({3, 110.0});
    m.voll = 2000.0;
    m.curtail_price = 0.0;
    m.reference_bus = 1;
    return m;
}

SystemModel valley_4bus() {
    SystemModel m;
    m.buses = {1, 2, 3, 4};
    m.existing_lines.push_back({1, 2, 150.0, 100.0, 0.0});
    m.existing_lines.push_back({2, 3, 150.0, 80.0, 0.0});
    m.existing_lines.push_back({3, 4, 150.0, 70.0, 0.0});
    m.existing_lines.push_back({4, 1, 150.0, 90.0, 0.0});
    m.thermal_units.push_back({1, 0.0, 170.0, 10.0, 60.0});
    m.thermal_units.push_back({3, 0.0, 90.0, 38.0, 45.0});
    m.thermal_units.push_back({4, 0.0, 70.0, 85.0, 70.0});
    m.candidate_lines.push_back({1, 3, 150.0, 80.0, 30000.0});
    m.candidate_wind.push_back({2, 60.0, 20000.0});
    m.candidate_wind.push_back({4, 50.0, 26000.0});
    m.loads.push_back({2, 95.0});
    m.loads.push_back({3, 75.0});
    m.loads.push_back({4, 55.0});
    m.voll = 2500.0;
    m.curtail_price = 0.0;
    m.reference_bus = 1;
    return m;
}

SystemModel grid_6bus() {
    SystemModel m;
    m.buses = {1, 2, 3, 4, 5, 6};
    m.existing_lines.push_back({1, 2, 180.0, 110.0, 0.0});
    m.existing_lines.push_back({2, 3, 180.0, 80.0, 0.0});
    m.existing_lines.push_back({3, 4, 180.0, 70.0, 0.0});
    m.existing_lines.push_back({4, 5, 180.0, 80.0, 0.0});
    m.existing_lines.push_back({5, 6, 180.0, 90.0, 0.0});
    m.existing_lines.push_back({6, 1, 180.0, 100.0, 0.0});
    m.existing_lines.push_back({2, 5, 180.0, 60.0, 0.0});
    m.thermal_units.push_back({1, 0.0, 200.0, 11.0, 80.0});
    m.thermal_units.push_back({3, 0.0, 80.0, 42.0, 40.0});
    m.thermal_units.push_back({5, 0.0, 110.0, 30.0, 50.0});
    m.thermal_units.push_back({6, 0.0, 60.0, 90.0, 60.0});
    m.candidate_lines.push_back({1, 4, 180.0, 80.0, 34000.0});
    m.candidate_lines.push_back({3, 6, 180.0, 70.0, 40000.0});
    m.candidate_wind.push_back({4, 60.0, 19000.0});
    m.candidate_wind.push_back({2, 50.0, 24000.0});
    m.candidate_wind.push_back({6, 45.0, 36000.0});
    m.candidate_lines.push_back({2, 4, 180.0, 60.0, 52000.0});
    m.loads.push_back({2, 90.0});
    m.loads.push_back({3, 70.0});
    m.loads.push_back({4, 85.0});
    m.loads.push_back({6, 60.0});
    m.voll = 2200.0;
    m.curtail_price = 0.0;
    m.reference_bus = 1;
    return m;
}

scenario::ScenarioSet coastal_days() {
    return scenario::to_full_set(synthetic_days(20, 4, 0x5eedul));
}

scenario::ScenarioSet valley_days() {
    return scenario::to_full_set(synthetic_days(27, 5, 0xbee5ul));
}

scenario::ScenarioSet grid_days() {
    return scenario::to_full_set(synthetic_days(35, 5, 0xcafeul));
}

clustering::Partition oracle_agglomerate(const scenario::ScenarioSet& set, int k) {
    using scenario::kFeatureDim;
    struct OCluster {
        std::vector<int> ids;  // ascending
        std::vector<double> weights;
    };
    std::vector<OCluster> cs;
    for (int i = 0; i < set.size(); ++i)
        cs.push_back({{set.provenance[i][0]}, {set.entries[i].weight}});

    auto features_of = [&](int day_id) -> const std::array<double, kFeatureDim>& {
        for (int i = 0; i < set.size(); ++i)
            if (set.provenance[i][0] == day_id) return set.entries[i].features;
        throw std::logic_error("oracle: unknown day");
    };
    auto mean_of = [&](const OCluster& c) {
        std::array<double, kFeatureDim> acc{};
        double total = 0.0;
        for (size_t i = 0; i < c.ids.size(); ++i) {
            const auto& f = features_of(c.ids[i]);
            for (int j = 0; j < kFeatureDim; ++j) acc[j] += c.weights[i] * f[j];
            total += c.weights[i];
        }
        for (int j = 0; j < kFeatureDim; ++j) acc[j] /= total;
        return acc;
    };

    while (static_cast<int>(cs.size()) > k) {
        double best = std::numeric_limits<double>::infinity();
        std::pair<int, int> best_key{-1, -1};
        int bi = -1, bj = -1;
        for (size_t i = 0; i < cs.size(); ++i) {
            for (size_t j = i + 1; j < cs.size(); ++j) {
                const auto ma = mean_of(cs[i]);
                const auto mb = mean_of(cs[j]);
                double sq = 0.0;
                for (int d = 0; d < kFeatureDim; ++d) {
                    const double delta = ma[d] - mb[d];
                    sq += delta * delta;
                }
                const double na = static_cast<double>(cs[i].ids.size());
                const double nb = static_cast<double>(cs[j].ids.size());
                const double dist = (2.0 * na * nb / (na + nb)) * sq;
                const int lo = std::min(cs[i].ids.front(), cs[j].ids.front());
                const int hi = std::max(cs[i].ids.front(), cs[j].ids.front());
                if (dist < best || (dist == best && std::make_pair(lo, hi) < best_key)) {
                    best = dist;
                    best_key = {lo, hi};
                    bi = static_cast<int>(i);
                    bj = static_cast<int>(j);
                }
            }
        }
        OCluster merged;
        std::merge(cs[bi].ids.begin(), cs[bi].ids.end(), cs[bj].ids.begin(), cs[bj].ids.end(),
                   std::back_inserter(merged.ids));
        for (int id : merged.ids) {
            for (size_t s = 0; s < cs[bi].ids.size(); ++s)
                if (cs[bi].ids[s] == id) merged.weights.push_back(cs[bi].weights[s]);
            for (size_t s = 0; s < cs[bj].ids.size(); ++s)
                if (cs[bj].ids[s] == id) merged.weights.push_back(cs[bj].weights[s]);
        }
        cs.erase(cs.begin() + bj);
        cs[bi] = std::move(merged);
    }

    clustering::Partition p;
    for (const auto& c : cs) {
        clustering::Cluster out;
        out.member_day_ids = c.ids;
        out.member_weights = c.weights;
        out.mean_features = mean_of(c);
        p.clusters.push_back(out);
    }
    std::sort(p.clusters.begin(), p.clusters.end(),
              [](const clustering::Cluster& a, const clustering::Cluster& b) {
                  return a.min_day_id() < b.min_day_id();
              });
    return p;
}

}  // namespace rdplan::testsupport
