#include "rdplan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "rdplan/errors.hpp"

namespace rdplan::metrics {

namespace {

double bound_tolerance(const ErrorReport& r) {
    // Relative to the full-scale optimum, with an absolute floor so reports
    // with a near-zero normalizer remain checkable.
    if (r.normalizer) return std::max(1e-6 * std::abs(*r.normalizer), 1e-6);
    return 1e-6;
}

opcost::OpCostOptions to_op_options(const MetricsOptions& o) {
    opcost::OpCostOptions out;
    out.backend = o.backend;
    out.cache = o.cache;
    return out;
}

solve::PlanOptions to_plan_options(const MetricsOptions& o) {
    solve::PlanOptions out;
    out.backend = o.backend;
    out.cache = o.cache;
    return out;
}

}  // namespace

double simplification_error(const PlanResult& reduced_plan, const PlanResult& reference_plan) {
    return reduced_plan.total_cost - reference_plan.total_cost;
}

double decision_error(const SystemModel& m, const InvestmentDecision& x_hat,
                      const PlanResult& reference_plan, const ScenarioSet& full,
                      const MetricsOptions& options) {
    const double actual = solve::evaluate_fixed(m, x_hat, full, to_plan_options(options));
    const double err = actual - reference_plan.total_cost;
    if (err < -1e-6 * std::max(std::abs(reference_plan.total_cost), 1.0)) {
        throw ValidationError(
            "decision_error: negative beyond tolerance; the reference plan is not the optimum "
            "of this full set");
    }
    return err;
}

double op_estimation_error(const SystemModel& m, const InvestmentDecision& x,
                           const ScenarioSet& full, const ScenarioSet& reduced,
                           const MetricsOptions& options) {
    const auto op = to_op_options(options);
    return opcost::op_cost(m, x, reduced, op).total - opcost::op_cost(m, x, full, op).total;
}

std::vector<std::pair<int, double>> per_rd_errors(const SystemModel& m,
                                                  const InvestmentDecision& x,
                                                  const ScenarioSet& full,
                                                  const ScenarioSet& reduced,
                                                  const MetricsOptions& options) {
    const auto pairs = opcost::per_cluster_costs(m, x, full, reduced, to_op_options(options));
    std::vector<std::pair<int, double>> out;
    out.reserve(pairs.size());
    for (size_t k = 0; k < pairs.size(); ++k) {
        out.emplace_back(static_cast<int>(k), pairs[k].first - pairs[k].second);
    }
    return out;
}

std::vector<std::pair<int, double>> ts_errors(const ScenarioSet& full,
                                              const ScenarioSet& reduced) {
    std::unordered_map<int, int> rd_of_day;
    for (int k = 0; k < reduced.size(); ++k)
        for (int id : reduced.provenance[k]) rd_of_day[id] = k;

    std::vector<std::pair<int, double>> out;
    out.reserve(full.size());
    for (int i = 0; i < full.size(); ++i) {
        if (full.provenance[i].size() != 1) {
            throw ValidationError("ts_errors: full set entry " + std::to_string(i) +
                                  " is not a single original day");
        }
        const int day = full.provenance[i][0];
        auto it = rd_of_day.find(day);
        if (it == rd_of_day.end()) {
            throw ValidationError("ts_errors: day " + std::to_string(day) +
                                  " has no representative");
        }
        const auto& f = full.entries[i].features;
        const auto& r = reduced.entries[it->second].features;
        double sq = 0.0;
        for (int j = 0; j < scenario::kFeatureDim; ++j) {
            const double d = f[j] - r[j];
            sq += d * d;
        }
        out.emplace_back(day, std::sqrt(sq));
    }
    return out;
}

std::map<std::string, BoundVerdict> check_bounds(const ErrorReport& report) {
    std::map<std::string, BoundVerdict> v;
    const double tol = bound_tolerance(report);
    const double op_hat = report.op_estimation_error;

    // (a) Decision error bounded by the spread of operational estimation errors.
    {
        BoundVerdict b;
        if (report.decision_error && report.op_estimation_error_ref) {
            const double dtot = *report.decision_error;
            const double spread = *report.op_estimation_error_ref - op_hat;
            b.evaluable = true;
            b.margin = std::min(dtot, spread - dtot);
            b.pass = b.margin >= -tol;
        }
        v["prop1_general_bound"] = b;
    }
    // (b) Practical bound for mean-based aggregation.
    {
        BoundVerdict b;
        if (report.decision_error) {
            const double dtot = *report.decision_error;
            b.evaluable = true;
            b.margin = std::min(dtot, -op_hat - dtot);
            b.pass = b.margin >= -tol;
        }
        v["thm1_practical_bound"] = b;
    }
    // (c) Negativity chain of the operational estimation errors.
    {
        BoundVerdict b;
        if (report.op_estimation_error_ref) {
            const double op_ref = *report.op_estimation_error_ref;
            b.evaluable = true;
            b.margin = std::min(op_ref - op_hat, -op_ref);
            b.pass = b.margin >= -tol;
        }
        v["underestimation_chain"] = b;
    }
    return v;
}

ErrorReport build_report(const SystemModel& m, const ScenarioSet& full,
                         const ScenarioSet& reduced, const PlanResult& reduced_plan,
                         const PlanResult* reference_plan, const MetricsOptions& options) {
    ErrorReport r;
    const auto op_opts = to_op_options(options);
    const auto& x_hat = reduced_plan.decision;

    const auto full_cost = opcost::op_cost(m, x_hat, full, op_opts);
    const auto reduced_cost = opcost::op_cost(m, x_hat, reduced, op_opts);
    r.op_estimation_error = reduced_cost.total - full_cost.total;
    r.per_rd_errors = per_rd_errors(m, x_hat, full, reduced, options);
    r.per_day_ts_errors = ts_errors(full, reduced);

    // Per original day: weighted estimated cost (via its RD) minus actual.
    std::unordered_map<int, int> entry_of_day;
    for (int i = 0; i < full.size(); ++i) entry_of_day[full.provenance[i][0]] = i;
    for (int k = 0; k < reduced.size(); ++k) {
        const double rd_unit_cost =
            reduced.entries[k].weight > 0.0
                ? reduced_cost.per_entry[k] / reduced.entries[k].weight
                : 0.0;
        std::vector<int> members = reduced.provenance[k];
        std::sort(members.begin(), members.end());
        for (int day : members) {
            const int i = entry_of_day.at(day);
            const double w = full.entries[i].weight;
            r.per_day_errors.emplace_back(day, w * rd_unit_cost - full_cost.per_entry[i]);
        }
    }
    std::sort(r.per_day_errors.begin(), r.per_day_errors.end());

    if (reference_plan) {
        r.normalizer = reference_plan->total_cost;
        r.simplification_error = simplification_error(reduced_plan, *reference_plan);
        r.decision_error = decision_error(m, x_hat, *reference_plan, full, options);
        r.op_estimation_error_ref =
            op_estimation_error(m, reference_plan->decision, full, reduced, options);
    }
    r.bound_verdicts = check_bounds(r);
    return r;
}

}  // namespace rdplan::metrics
