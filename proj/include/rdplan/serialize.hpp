#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rdplan/clustering.hpp"
#include "rdplan/feedback.hpp"
#include "rdplan/metrics.hpp"
#include "rdplan/scenario.hpp"
#include "rdplan/solve.hpp"
#include "rdplan/sysmodel.hpp"

namespace rdplan::serialize {

/// Reads `hour,load,wind` CSV with 0-based consecutive hours; returns the two
/// raw series in file order.
std::pair<scenario::HourlySeries, scenario::HourlySeries> read_timeseries_csv(
    const std::string& path);

sysmodel::SystemModel read_system_json(const std::string& path);
void write_system_json(const sysmodel::SystemModel& m, const std::string& path);

scenario::ScenarioSet read_scenario_set_json(const std::string& path);
void write_scenario_set_json(const scenario::ScenarioSet& set, const std::string& path);

void write_partition_json(const clustering::Partition& p, const std::string& path);

solve::PlanResult read_plan_json(const std::string& path);
void write_plan_json(const solve::PlanResult& plan, const std::string& path);
void write_plan_trace_csv(const solve::PlanResult& plan, const std::string& path);

void write_error_report_json(const metrics::ErrorReport& r, const std::string& path);
void write_per_day_errors_csv(const metrics::ErrorReport& r, const std::string& path);
void write_per_rd_errors_csv(const metrics::ErrorReport& r,
                             const scenario::ScenarioSet& reduced, const std::string& path);

void write_feedback_trace_json(const feedback::FeedbackTrace& t, const std::string& path);
void write_feedback_trace_csv(const feedback::FeedbackTrace& t, const solve::PlanResult* reference,
                              const std::string& path);

void write_sweep_csv(const std::vector<std::pair<int, metrics::ErrorReport>>& sweep,
                     const std::string& path);

}  // namespace rdplan::serialize
