#include "rdplan/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "rdplan/errors.hpp"

namespace rdplan::scenario {

std::array<double, kFeatureDim> DayProfile::features() const {
    std::array<double, kFeatureDim> f{};
    std::copy(load_factors.begin(), load_factors.end(), f.begin());
    std::copy(wind_factors.begin(), wind_factors.end(), f.begin() + kHoursPerDay);
    return f;
}

double ScenarioSet::total_weight() const {
    double w = 0.0;
    for (const auto& e : entries) w += e.weight;
    return w;
}

HourlySeries normalize(const HourlySeries& series) {
    if (series.values.empty()) {
        throw ValidationError("normalize: series '" + series.name + "' is empty");
    }
    double peak = 0.0;
    for (double v : series.values) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ValidationError("normalize: series '" + series.name +
                                  "' contains a negative or non-finite sample");
        }
        peak = std::max(peak, v);
    }
    if (peak <= 0.0) {
        throw ValidationError("normalize: series '" + series.name +
                              "' is all zero, normalization undefined");
    }
    HourlySeries out;
    out.name = series.name;
    out.values.reserve(series.values.size());
    for (double v : series.values) out.values.push_back(v / peak);
    return out;
}

std::vector<DayProfile> segment_days(const HourlySeries& load, const HourlySeries& wind) {
    if (load.hours() != wind.hours()) {
        throw ValidationError("segment_days: load has " + std::to_string(load.hours()) +
                              " hours but wind has " + std::to_string(wind.hours()));
    }
    if (load.hours() == 0 || load.hours() % kHoursPerDay != 0) {
        throw ValidationError("segment_days: length " + std::to_string(load.hours()) +
                              " is not a positive multiple of 24");
    }
    auto check_factor = [](const HourlySeries& s, int hour) {
        double v = s.values[hour];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ValidationError("segment_days: series '" + s.name + "' hour " +
                                  std::to_string(hour) + " value " + std::to_string(v) +
                                  " outside [0,1]; run normalize first");
        }
    };
    const int n_days = load.days();
    std::vector<DayProfile> days(n_days);
    for (int d = 0; d < n_days; ++d) {
        days[d].day_id = d;
        days[d].weight = 1.0;
        for (int t = 0; t < kHoursPerDay; ++t) {
            const int h = d * kHoursPerDay + t;
            check_factor(load, h);
            check_factor(wind, h);
            days[d].load_factors[t] = load.values[h];
            days[d].wind_factors[t] = wind.values[h];
        }
    }
    return days;
}

ScenarioSet to_full_set(const std::vector<DayProfile>& days) {
    if (days.empty()) {
        throw ValidationError("to_full_set: empty day list");
    }
    ScenarioSet set;
    set.kind = SetKind::Full;
    set.entries.reserve(days.size());
    set.provenance.reserve(days.size());
    for (const auto& d : days) {
        set.entries.push_back({d.weight, d.features()});
        set.provenance.push_back({d.day_id});
    }
    return set;
}

}  // namespace rdplan::scenario
