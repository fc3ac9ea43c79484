#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rdplan::sysmodel {

using BusId = int;

struct Line {
    BusId from_bus = 0;
    BusId to_bus = 0;
    double susceptance = 0.0;  // p.u.
    double capacity = 0.0;     // MW
    double invest_cost = 0.0;  // currency/yr; meaningful for candidates only
};

struct ThermalGen {
    BusId bus = 0;
    double p_min = 0.0;         // MW
    double p_max = 0.0;         // MW
    double marginal_cost = 0.0; // currency/MWh
    double ramp = 0.0;          // MW/h
};

struct WindFarm {
    BusId bus = 0;
    double capacity = 0.0;     // MW
    double invest_cost = 0.0;  // currency/yr
};

struct Load {
    BusId bus = 0;
    double peak = 0.0;  // MW
};

struct SystemModel {
    std::vector<BusId> buses;
    std::vector<Line> existing_lines;
    std::vector<Line> candidate_lines;
    std::vector<ThermalGen> thermal_units;
    std::vector<WindFarm> candidate_wind;
    std::vector<Load> loads;
    double voll = 0.0;           // currency/MWh on shed demand
    double curtail_price = 0.0;  // currency/MWh on curtailed wind
    BusId reference_bus = 0;

    int candidate_count() const {
        return static_cast<int>(candidate_lines.size() + candidate_wind.size());
    }
};

/// Binary build/don't-build choice over the candidate assets.
struct InvestmentDecision {
    std::vector<bool> line_built;
    std::vector<bool> wind_built;

    bool operator==(const InvestmentDecision&) const = default;

    /// Bit mask with candidate lines in the low bits, wind farms above them.
    std::uint64_t mask() const;
    /// Concatenated bit string, lines then wind, e.g. "01|101" without the bar.
    std::string bits() const;
};

struct Violation {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string where;
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const {
        for (const auto& v : violations)
            if (v.severity == Violation::Severity::Error) return false;
        return true;
    }
};

/// Checks every structural invariant and returns the violations found.
ValidationResult validate(const SystemModel& m);

/// Annualized cost of the built candidates.
double invest_cost(const SystemModel& m, const InvestmentDecision& x);

/// All 2^n binary decisions in lexicographic order (first candidate is the
/// most significant bit). Throws CapacityError above `limit` candidates.
std::vector<InvestmentDecision> enumerate_decisions(const SystemModel& m, int limit = 16);

/// Decision for enumeration index i under the same lexicographic order.
InvestmentDecision decision_from_index(const SystemModel& m, std::uint64_t index);

}  // namespace rdplan::sysmodel
