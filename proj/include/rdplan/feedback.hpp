#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rdplan/clustering.hpp"
#include "rdplan/metrics.hpp"
#include "rdplan/solve.hpp"

namespace rdplan::feedback {

using metrics::ErrorReport;
using scenario::ScenarioSet;
using solve::PlanResult;
using sysmodel::SystemModel;

struct FeedbackConfig {
    int n0 = 0;      // initial representative count
    int n_loop = 0;  // feedback iterations
    int n_step = 1;  // representatives added per loop
    int n_bad = 1;   // worst representatives refined per loop
};

struct LoopRecord {
    int rd_count = 0;
    PlanResult plan;                                // decision found on the reduced set
    double total_on_full = 0.0;                     // C_tot of that decision on the full set
    double op_estimation_error = 0.0;
    std::vector<std::pair<int, double>> per_rd_errors;
    std::vector<int> replaced_rds;                  // empty on the final record
};

struct FeedbackTrace {
    std::vector<LoopRecord> loops;
};

struct FeedbackOptions {
    solve::PlanOptions plan;
    const PlanResult* reference = nullptr;  // enables decision-error columns in exports
    // Invoked after each loop's planning step with the reduced set it used.
    std::function<void(int loop_index, const ScenarioSet& reduced, const LoopRecord& record)>
        on_loop;
};

struct FeedbackResult {
    ScenarioSet final_set;
    FeedbackTrace trace;
};

/// Iterative re-clustering: plan on the reduced set, locate the representatives
/// with the largest absolute operational estimation error, re-cluster only
/// their member days into more clusters, splice, and repeat. The trace gets
/// one record per loop plus a final record at the target count.
FeedbackResult run_feedback(const SystemModel& m, const ScenarioSet& full,
                            const FeedbackConfig& cfg, const FeedbackOptions& options = {});

/// Direct mean-based clustering at each count, planning and reporting per
/// count; the benchmark curve feedback is compared against.
std::vector<std::pair<int, ErrorReport>> baseline_sweep(const SystemModel& m,
                                                        const ScenarioSet& full,
                                                        const std::vector<int>& rd_counts,
                                                        const PlanResult* reference = nullptr,
                                                        const solve::PlanOptions& options = {});

}  // namespace rdplan::feedback
