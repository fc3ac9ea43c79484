#include "rdplan/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rdplan/errors.hpp"

namespace rdplan::feedback {

namespace {

metrics::MetricsOptions to_metrics_options(const solve::PlanOptions& p) {
    metrics::MetricsOptions m;
    m.backend = p.backend;
    m.cache = p.cache;
    return m;
}

void check_config(const FeedbackConfig& cfg, int n_days) {
    if (cfg.n0 < 1 || cfg.n_step < 1 || cfg.n_bad < 1 || cfg.n_loop < 0) {
        throw ValidationError("run_feedback: N0, N_step, N_bad must be >= 1 and N_loop >= 0");
    }
    if (cfg.n0 > n_days) {
        throw ValidationError("run_feedback: N0 = " + std::to_string(cfg.n0) + " exceeds the " +
                              std::to_string(n_days) + " available days");
    }
    const int final_count = cfg.n0 + cfg.n_loop * cfg.n_step;
    if (final_count > n_days) {
        throw ValidationError("run_feedback: final RD count " + std::to_string(final_count) +
                              " exceeds the " + std::to_string(n_days) + " available days");
    }
}

}  // namespace

FeedbackResult run_feedback(const SystemModel& m, const ScenarioSet& full,
                            const FeedbackConfig& cfg, const FeedbackOptions& options) {
    check_config(cfg, full.size());
    const int target = cfg.n0 + cfg.n_loop * cfg.n_step;
    const auto mopts = to_metrics_options(options.plan);

    ScenarioSet reduced = clustering::make_representatives(clustering::agglomerate(full, cfg.n0));

    FeedbackResult out;
    int loop_index = 0;
    while (true) {
        const int nrd = reduced.size();

        LoopRecord rec;
        rec.rd_count = nrd;
        rec.plan = solve::plan(m, reduced, options.plan);
        rec.total_on_full = solve::evaluate_fixed(m, rec.plan.decision, full, options.plan);
        rec.op_estimation_error =
            rec.plan.op_cost - (rec.total_on_full - rec.plan.invest_cost);
        rec.per_rd_errors = metrics::per_rd_errors(m, rec.plan.decision, full, reduced, mopts);
        if (options.on_loop) options.on_loop(loop_index, reduced, rec);

        if (nrd >= target) {
            out.trace.loops.push_back(std::move(rec));
            break;
        }

        if (cfg.n_bad > nrd) {
            throw ValidationError("run_feedback: loop " + std::to_string(loop_index) +
                                  ": N_bad = " + std::to_string(cfg.n_bad) +
                                  " exceeds the current " + std::to_string(nrd) +
                                  " representatives");
        }

        // Rank by |error| descending; ties prefer the heavier cluster, then the
        // smaller index. Singletons cannot be split when they are the only
        // selection, so they are passed over in that case.
        std::vector<int> order(nrd);
        for (int k = 0; k < nrd; ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double ea = std::abs(rec.per_rd_errors[a].second);
            const double eb = std::abs(rec.per_rd_errors[b].second);
            if (ea != eb) return ea > eb;
            const double wa = reduced.entries[a].weight;
            const double wb = reduced.entries[b].weight;
            if (wa != wb) return wa > wb;
            return a < b;
        });
        std::vector<int> selected;
        for (int k : order) {
            if (cfg.n_bad == 1 && reduced.provenance[k].size() < 2) continue;
            selected.push_back(k);
            if (static_cast<int>(selected.size()) == cfg.n_bad) break;
        }
        if (static_cast<int>(selected.size()) < cfg.n_bad) {
            throw ValidationError("run_feedback: loop " + std::to_string(loop_index) +
                                  ": fewer than N_bad splittable representatives");
        }
        std::sort(selected.begin(), selected.end());

        std::vector<int> pooled_days;
        for (int k : selected) {
            pooled_days.insert(pooled_days.end(), reduced.provenance[k].begin(),
                               reduced.provenance[k].end());
        }
        const int k_sub = cfg.n_bad + cfg.n_step;
        if (static_cast<int>(pooled_days.size()) < k_sub) {
            throw ValidationError("run_feedback: loop " + std::to_string(loop_index) +
                                  ": the selected representatives hold " +
                                  std::to_string(pooled_days.size()) +
                                  " days, fewer than N_bad + N_step = " + std::to_string(k_sub));
        }

        rec.replaced_rds = selected;
        out.trace.loops.push_back(std::move(rec));

        const ScenarioSet new_rds = clustering::make_representatives(
            clustering::recluster_subset(full, pooled_days, k_sub));

        // Splice: the first N_bad new representatives take the removed slots in
        // order; the remaining N_step go to the end.
        for (int i = 0; i < cfg.n_bad; ++i) {
            reduced.entries[selected[i]] = new_rds.entries[i];
            reduced.provenance[selected[i]] = new_rds.provenance[i];
        }
        for (int i = cfg.n_bad; i < k_sub; ++i) {
            reduced.entries.push_back(new_rds.entries[i]);
            reduced.provenance.push_back(new_rds.provenance[i]);
        }
        ++loop_index;
    }

    out.final_set = std::move(reduced);
    return out;
}

std::vector<std::pair<int, ErrorReport>> baseline_sweep(const SystemModel& m,
                                                        const ScenarioSet& full,
                                                        const std::vector<int>& rd_counts,
                                                        const PlanResult* reference,
                                                        const solve::PlanOptions& options) {
    std::vector<std::pair<int, ErrorReport>> out;
    const auto mopts = to_metrics_options(options);
    for (int count : rd_counts) {
        if (count < 1 || count > full.size()) {
            throw ValidationError("baseline_sweep: RD count " + std::to_string(count) +
                                  " out of range [1," + std::to_string(full.size()) + "]");
        }
        const ScenarioSet reduced =
            clustering::make_representatives(clustering::agglomerate(full, count));
        const PlanResult plan_res = solve::plan(m, reduced, options);
        out.emplace_back(count, metrics::build_report(m, full, reduced, plan_res, reference, mopts));
    }
    return out;
}

}  // namespace rdplan::feedback
