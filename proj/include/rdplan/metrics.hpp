#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rdplan/opcost.hpp"
#include "rdplan/solve.hpp"

namespace rdplan::metrics {

using scenario::ScenarioSet;
using solve::PlanResult;
using sysmodel::InvestmentDecision;
using sysmodel::SystemModel;

struct BoundVerdict {
    bool evaluable = false;
    bool pass = false;
    double margin = 0.0;  // slack to the bound; negative when violated
};

/// The three aggregation error metrics with their decompositions and the
/// bound-check verdicts for one planning run.
struct ErrorReport {
    std::optional<double> simplification_error;        // C_tot(x_hat, reduced) - C_tot(ref)
    std::optional<double> decision_error;              // needs the reference decision
    double op_estimation_error = 0.0;                  // for x_hat
    std::optional<double> op_estimation_error_ref;     // for the reference decision
    std::vector<std::pair<int, double>> per_rd_errors;
    std::vector<std::pair<int, double>> per_day_errors;
    std::vector<std::pair<int, double>> per_day_ts_errors;
    std::optional<double> normalizer;                  // C_tot(ref) on the full set
    std::map<std::string, BoundVerdict> bound_verdicts;
};

struct MetricsOptions {
    lp::LpBackendFactory backend;
    opcost::DayCostCache* cache = nullptr;
};

/// Reduced-model optimum minus full-model optimum; sign-indefinite.
double simplification_error(const PlanResult& reduced_plan, const PlanResult& reference_plan);

/// True total cost of x_hat on the full set minus the reference optimum.
double decision_error(const SystemModel& m, const InvestmentDecision& x_hat,
                      const PlanResult& reference_plan, const ScenarioSet& full,
                      const MetricsOptions& options = {});

/// Reduced-set minus full-set operational cost for a fixed decision.
double op_estimation_error(const SystemModel& m, const InvestmentDecision& x,
                           const ScenarioSet& full, const ScenarioSet& reduced,
                           const MetricsOptions& options = {});

/// Per-representative share of the operational estimation error.
std::vector<std::pair<int, double>> per_rd_errors(const SystemModel& m,
                                                  const InvestmentDecision& x,
                                                  const ScenarioSet& full,
                                                  const ScenarioSet& reduced,
                                                  const MetricsOptions& options = {});

/// Euclidean distance between each original day and its representative.
std::vector<std::pair<int, double>> ts_errors(const ScenarioSet& full,
                                              const ScenarioSet& reduced);

/// Fills the verdicts for the decision-error bounds and the negativity chain.
/// Verdicts needing the reference are marked not evaluable when it is absent.
std::map<std::string, BoundVerdict> check_bounds(const ErrorReport& report);

/// Runs every metric for one pipeline outcome and assembles the report.
ErrorReport build_report(const SystemModel& m, const ScenarioSet& full,
                         const ScenarioSet& reduced, const PlanResult& reduced_plan,
                         const PlanResult* reference_plan, const MetricsOptions& options = {});

}  // namespace rdplan::metrics
