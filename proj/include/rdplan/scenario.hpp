#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rdplan::scenario {

inline constexpr int kHoursPerDay = 24;
inline constexpr int kFeatureDim = 2 * kHoursPerDay;  // load factors followed by wind factors

/// One channel of raw input data at hourly resolution.
struct HourlySeries {
    std::string name;
    std::vector<double> values;

    int hours() const { return static_cast<int>(values.size()); }
    int days() const { return hours() / kHoursPerDay; }
};

/// One original day: 24 load factors, 24 wind factors, and a weight.
struct DayProfile {
    int day_id = 0;
    std::array<double, kHoursPerDay> load_factors{};
    std::array<double, kHoursPerDay> wind_factors{};
    double weight = 1.0;

    /// Concatenated (load || wind) feature vector.
    std::array<double, kFeatureDim> features() const;
};

enum class SetKind { Full, Reduced };

struct ScenarioEntry {
    double weight = 0.0;
    std::array<double, kFeatureDim> features{};
};

/// Weighted collection of day feature vectors, full-scale or reduced,
/// with provenance links from each entry back to original day ids.
struct ScenarioSet {
    SetKind kind = SetKind::Full;
    std::vector<ScenarioEntry> entries;
    std::vector<std::vector<int>> provenance;  // parallel to entries

    int size() const { return static_cast<int>(entries.size()); }
    double total_weight() const;
};

/// Scales a series by its maximum so the output peaks at exactly 1.
/// Throws ValidationError for all-zero, negative, or non-finite input.
HourlySeries normalize(const HourlySeries& series);

/// Splits two aligned factor series into per-day profiles, weight 1 each.
/// Both series must have the same length, divisible by 24, with values in [0,1].
std::vector<DayProfile> segment_days(const HourlySeries& load, const HourlySeries& wind);

/// Materializes the full-scale scenario set: one entry per day, provenance {day_id}.
ScenarioSet to_full_set(const std::vector<DayProfile>& days);

}  // namespace rdplan::scenario
