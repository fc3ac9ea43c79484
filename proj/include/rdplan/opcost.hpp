#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "rdplan/lp.hpp"
#include "rdplan/scenario.hpp"
#include "rdplan/sysmodel.hpp"

namespace rdplan::opcost {

using scenario::kFeatureDim;
using scenario::kHoursPerDay;
using scenario::ScenarioSet;
using sysmodel::InvestmentDecision;
using sysmodel::SystemModel;

/// Primal solution of one daily subproblem, unpacked per asset and hour.
struct DailyDispatch {
    std::vector<std::array<double, kHoursPerDay>> generation;   // per thermal unit
    std::vector<std::array<double, kHoursPerDay>> wind_output;  // per built farm
    std::vector<std::array<double, kHoursPerDay>> curtailed;    // per built farm
    std::vector<std::array<double, kHoursPerDay>> angles;       // per bus
    std::vector<std::array<double, kHoursPerDay>> flows;        // per in-service line
    std::vector<std::array<double, kHoursPerDay>> shed;         // per bus
    std::vector<int> built_wind_indices;                        // into m.candidate_wind
    double cost = 0.0;

    /// Largest power-balance residual over all bus-hours, in MW.
    double max_balance_residual(const SystemModel& m, const InvestmentDecision& x,
                                std::span<const double> features) const;
    /// Largest flow-limit excess over all in-service line-hours, in MW.
    double max_flow_excess(const SystemModel& m, const InvestmentDecision& x) const;
};

/// Weighted operational cost of a scenario set for a fixed decision.
struct OpCostResult {
    double total = 0.0;
    std::vector<double> per_entry;  // weighted, one per scenario entry
    std::vector<DailyDispatch> dispatches;  // filled only when requested
};

/// The daily LP for fixed (model, decision). The matrix, objective and
/// variable bounds do not depend on the day; only row bounds do, so one
/// structure serves every day of a scenario set.
class DailyLpStructure {
public:
    DailyLpStructure(const SystemModel& m, const InvestmentDecision& x);

    const lp::LpProblem& base_problem() const { return lp_; }
    /// Row bounds for a specific day's 48 factors.
    void day_row_bounds(std::span<const double> features, std::vector<double>& lower,
                        std::vector<double>& upper) const;

    DailyDispatch extract(const lp::LpSolution& sol) const;

    int gen_var(int unit, int hour) const { return gen0_ + unit * kHoursPerDay + hour; }
    int shed_var(int bus, int hour) const { return shed0_ + bus * kHoursPerDay + hour; }

private:
    friend lp::LpProblem build_daily_lp(const SystemModel&, const InvestmentDecision&,
                                        std::span<const double>);
    const SystemModel* model_;
    std::vector<int> built_wind_;   // candidate_wind indices
    std::vector<int> service_from_, service_to_;  // bus indices per in-service line
    std::vector<double> service_cap_;
    std::vector<double> bus_peak_;  // summed load peak per bus index
    int n_buses_ = 0, n_units_ = 0, n_wind_ = 0, n_lines_ = 0;
    int gen0_ = 0, wind0_ = 0, curt0_ = 0, ang0_ = 0, flow0_ = 0, shed0_ = 0;
    int balance_row0_ = 0, windbal_row0_ = 0;
    lp::LpProblem lp_;
};

/// Builds the complete LP instance for one day (structure plus that day's
/// row bounds). Day features only ever land on constraint right-hand sides.
lp::LpProblem build_daily_lp(const SystemModel& m, const InvestmentDecision& x,
                             std::span<const double> features);

/// Thread-safe cache of optimal daily costs keyed by (decision, day features).
class DayCostCache {
public:
    std::optional<double> lookup(std::uint64_t mask,
                                 const std::array<double, kFeatureDim>& features) const;
    void store(std::uint64_t mask, const std::array<double, kFeatureDim>& features, double cost);
    size_t size() const;

private:
    struct Key {
        std::uint64_t mask;
        std::array<double, kFeatureDim> features;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        size_t operator()(const Key& k) const;
    };
    mutable std::shared_mutex mutex_;
    std::unordered_map<Key, double, KeyHash> map_;
};

struct OpCostOptions {
    lp::LpBackendFactory backend;        // defaults to the built-in simplex
    DayCostCache* cache = nullptr;       // optional cross-call cost reuse
    bool keep_dispatches = false;        // solve even cached days and unpack primals
};

/// Weighted sum of per-day optimal costs, solved independently per day and
/// accumulated in entry order. Throws BackendError (with the entry id) if a
/// day fails to solve.
OpCostResult op_cost(const SystemModel& m, const InvestmentDecision& x, const ScenarioSet& set,
                     const OpCostOptions& options = {});

/// For each representative k: (weighted RD cost, summed weighted member-day
/// cost). Reuses cached per-day solves when a cache is supplied.
std::vector<std::pair<double, double>> per_cluster_costs(const SystemModel& m,
                                                         const InvestmentDecision& x,
                                                         const ScenarioSet& full,
                                                         const ScenarioSet& reduced,
                                                         const OpCostOptions& options = {});

/// Writes dispatches as CSV rows `entry,hour,bus,gen,wind,shed,net_flow`.
void write_dispatch_csv(const SystemModel& m, const InvestmentDecision& x,
                        const OpCostResult& result, const std::string& path);

}  // namespace rdplan::opcost
