#pragma once

#include <optional>
#include <vector>

#include "rdplan/opcost.hpp"
#include "rdplan/scenario.hpp"
#include "rdplan/sysmodel.hpp"

namespace rdplan::solve {

using opcost::DayCostCache;
using scenario::ScenarioSet;
using sysmodel::InvestmentDecision;
using sysmodel::SystemModel;

struct TraceRow {
    InvestmentDecision decision;
    double invest = 0.0;
    double op = 0.0;
    double total = 0.0;
};

struct PlanResult {
    InvestmentDecision decision;
    double total_cost = 0.0;
    double invest_cost = 0.0;
    double op_cost = 0.0;
    std::vector<TraceRow> per_decision_trace;  // filled only when requested
};

struct PlanOptions {
    int enum_limit = 16;
    int jobs = 1;           // parallel decision evaluations
    bool prune = true;      // skip x when invest_cost(x) already matches/beats the best total
    bool keep_trace = false;
    lp::LpBackendFactory backend;
    DayCostCache* cache = nullptr;
};

/// Exact planning: evaluates invest + operational cost for every binary
/// decision and returns the minimizer (ties go to the lexicographically
/// smallest decision vector).
PlanResult plan(const SystemModel& m, const ScenarioSet& set, const PlanOptions& options = {});

/// plan() on the full-scale set; the result is the reference decision.
PlanResult reference_solution(const SystemModel& m, const ScenarioSet& full,
                              const PlanOptions& options = {});

/// Total cost of a fixed decision on a set; no optimization over x.
double evaluate_fixed(const SystemModel& m, const InvestmentDecision& x, const ScenarioSet& full,
                      const PlanOptions& options = {});

}  // namespace rdplan::solve
