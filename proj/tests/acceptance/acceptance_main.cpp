// Acceptance suite: runs every checked property on the synthetic fixtures and
// prints one pass/fail line per criterion. Exits nonzero when any fails.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "fixtures.hpp"
#include "rdplan/clustering.hpp"
#include "rdplan/feedback.hpp"
#include "rdplan/metrics.hpp"
#include "rdplan/opcost.hpp"
#include "rdplan/solve.hpp"

using namespace rdplan;
using clustering::agglomerate;
using clustering::make_representatives;
using opcost::DayCostCache;
using scenario::ScenarioSet;
using solve::PlanOptions;
using sysmodel::InvestmentDecision;
using sysmodel::SystemModel;

namespace {

struct Fixture {
    std::string name;
    SystemModel model;
    ScenarioSet full;
    std::shared_ptr<DayCostCache> cache = std::make_shared<DayCostCache>();
};

struct Suite {
    int failures = 0;

    void criterion(int id, const std::string& what, bool pass, const std::string& detail) {
        std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
};

std::vector<Fixture> make_fixtures() {
    std::vector<Fixture> fs;
    fs.push_back({"coastal-3bus", testsupport::coastal_3bus(), testsupport::coastal_days()});
    fs.push_back({"valley-4bus", testsupport::valley_4bus(), testsupport::valley_days()});
    fs.push_back({"grid-6bus", testsupport::grid_6bus(), testsupport::grid_days()});
    return fs;
}

void parallel_indices(std::uint64_t count, int jobs, const std::function<void(std::uint64_t)>& fn) {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

constexpr int kReducedCounts[] = {2, 5, 10};

// Criterion 1: mean-based reduction never over-estimates the operational
// cost, for every investment decision and every tested K.
void criterion1(Suite& s, std::vector<Fixture>& fixtures) {
    double worst = -std::numeric_limits<double>::infinity();
    std::string where = "-";
    bool pass = true;
    for (auto& f : fixtures) {
        std::vector<ScenarioSet> reduced;
        for (int k : kReducedCounts)
            reduced.push_back(make_representatives(agglomerate(f.full, k)));
        const std::uint64_t count = 1ull << f.model.candidate_count();
        std::atomic<bool> ok{true};
        std::mutex mu;
        parallel_indices(count, 2, [&](std::uint64_t i) {
            const auto x = sysmodel::decision_from_index(f.model, i);
            opcost::OpCostOptions opts;
            opts.cache = f.cache.get();
            const double full_op = opcost::op_cost(f.model, x, f.full, opts).total;
            for (size_t r = 0; r < reduced.size(); ++r) {
                const double red_op = opcost::op_cost(f.model, x, reduced[r], opts).total;
                const double err = red_op - full_op;
                const double limit = 1e-6 * std::abs(full_op);
                std::lock_guard lock(mu);
                if (err > worst) {
                    worst = err;
                    where = f.name + " x=" + x.bits() + " K=" +
                            std::to_string(kReducedCounts[r]);
                }
                if (err > limit) ok = false;
            }
        });
        if (!ok) pass = false;
    }
    s.criterion(1, "Prop 2 under-estimation for every decision and K in {2,5,10}", pass,
                "max error " + fmt(worst) + " at " + where);
}

struct PipelineRun {
    std::string fixture;
    int k = 0;
    metrics::ErrorReport report;
    ScenarioSet reduced;
    solve::PlanResult reduced_plan;
};

}  // namespace

int main() {
    Suite s;
    auto fixtures = make_fixtures();

    criterion1(s, fixtures);

    // Shared pipeline runs: reference plus the three K values per fixture.
    std::vector<PipelineRun> runs;
    std::vector<solve::PlanResult> references;
    for (auto& f : fixtures) {
        PlanOptions popts;
        popts.cache = f.cache.get();
        popts.jobs = 2;
        const auto reference = solve::reference_solution(f.model, f.full, popts);
        references.push_back(reference);
        metrics::MetricsOptions mopts;
        mopts.cache = f.cache.get();
        for (int k : kReducedCounts) {
            PipelineRun run;
            run.fixture = f.name;
            run.k = k;
            run.reduced = make_representatives(agglomerate(f.full, k));
            run.reduced_plan = solve::plan(f.model, run.reduced, popts);
            run.report = metrics::build_report(f.model, f.full, run.reduced, run.reduced_plan,
                                               &reference, mopts);
            runs.push_back(std::move(run));
        }
    }

    // Criterion 2: Thm 1 practical bound on every pipeline run.
    {
        bool pass = true;
        double worst = std::numeric_limits<double>::infinity();
        std::string where = "-";
        for (const auto& run : runs) {
            const double tol = 1e-6 * std::abs(*run.report.normalizer);
            const double dtot = *run.report.decision_error;
            const double margin =
                std::min(dtot + tol, -run.report.op_estimation_error + tol - dtot);
            if (margin < worst) {
                worst = margin;
                where = run.fixture + " K=" + std::to_string(run.k);
            }
            if (!(dtot >= -tol && dtot <= -run.report.op_estimation_error + tol)) pass = false;
        }
        s.criterion(2, "Thm 1: 0 <= decision error <= -op estimation error", pass,
                    "min margin " + fmt(worst) + " at " + where);
    }

    // Criterion 3: Prop 1 general bound and the Eq. 12 negativity chain.
    {
        bool pass = true;
        double worst = std::numeric_limits<double>::infinity();
        std::string where = "-";
        for (const auto& run : runs) {
            const double tol = 1e-6 * std::abs(*run.report.normalizer);
            const double dtot = *run.report.decision_error;
            const double op_hat = run.report.op_estimation_error;
            const double op_ref = *run.report.op_estimation_error_ref;
            const double m1 = (op_ref - op_hat) + tol - dtot;  // Prop 1 upper bound
            const double m2 = op_ref - op_hat + tol;           // chain: op_hat <= op_ref
            const double m3 = -op_ref + tol;                   // chain: op_ref <= 0
            const double margin = std::min({m1, m2, m3});
            if (margin < worst) {
                worst = margin;
                where = run.fixture + " K=" + std::to_string(run.k);
            }
            if (margin < 0.0) pass = false;
        }
        s.criterion(3, "Prop 1 bound with reference and the under-estimation chain", pass,
                    "min margin " + fmt(worst) + " at " + where);
    }

    // Criterion 4: identity relating the three errors.
    {
        bool pass = true;
        double worst = 0.0;
        for (const auto& run : runs) {
            const double tol = 1e-6 * std::abs(*run.report.normalizer);
            const double gap = std::abs(*run.report.decision_error -
                                        (*run.report.simplification_error -
                                         run.report.op_estimation_error));
            worst = std::max(worst, gap);
            if (gap > tol) pass = false;
        }
        s.criterion(4, "identity: decision = simplification - op estimation", pass,
                    "max residual " + fmt(worst));
    }

    // Criterion 5: K = |D| singleton clustering is exact.
    {
        bool pass = true;
        std::string detail = "all zero";
        for (size_t fi = 0; fi < fixtures.size(); ++fi) {
            auto& f = fixtures[fi];
            PlanOptions popts;
            popts.cache = f.cache.get();
            metrics::MetricsOptions mopts;
            mopts.cache = f.cache.get();
            const auto reduced = make_representatives(agglomerate(f.full, f.full.size()));
            const auto plan = solve::plan(f.model, reduced, popts);
            const auto report =
                metrics::build_report(f.model, f.full, reduced, plan, &references[fi], mopts);
            const double scale = std::abs(references[fi].total_cost);
            const bool here = std::abs(*report.simplification_error) <= 1e-9 * scale &&
                              std::abs(*report.decision_error) <= 1e-9 * scale &&
                              std::abs(report.op_estimation_error) <= 1e-9 * scale &&
                              plan.decision == references[fi].decision;
            if (!here) {
                pass = false;
                detail = "violated on " + f.name;
            }
        }
        s.criterion(5, "degenerate exactness at K = |D| with matching decisions", pass, detail);
    }

    // Criterion 6: the per-RD errors decompose the total exactly.
    {
        bool pass = true;
        double worst = 0.0;
        for (const auto& run : runs) {
            double sum = 0.0;
            for (const auto& [k, e] : run.report.per_rd_errors) {
                sum += e;
                if (run.reduced.provenance[k].size() == 1 && e != 0.0) pass = false;
            }
            const double rel =
                std::abs(sum - run.report.op_estimation_error) /
                std::max(std::abs(run.report.op_estimation_error), 1.0);
            worst = std::max(worst, rel);
            if (rel > 1e-6) pass = false;
        }
        s.criterion(6, "per-RD errors sum to the total; singletons contribute zero", pass,
                    "max relative residual " + fmt(worst));
    }

    // Criterion 7: feedback beats (or matches) direct clustering at the same
    // final count, with a strict >10% improvement somewhere.
    {
        bool pass = true;
        bool strict = false;
        std::string detail;
        struct Cfg {
            size_t fixture;
            int n0, loops;
        };
        const Cfg cfgs[] = {{1, 5, 5}, {0, 4, 4}};  // valley 5->10, coastal 4->8
        for (const auto& c : cfgs) {
            auto& f = fixtures[c.fixture];
            feedback::FeedbackOptions fopts;
            fopts.plan.cache = f.cache.get();
            fopts.plan.jobs = 2;
            const auto res =
                feedback::run_feedback(f.model, f.full, {c.n0, c.loops, 1, 1}, fopts);
            const double fb = std::abs(res.trace.loops.back().op_estimation_error);
            const auto sweep = feedback::baseline_sweep(f.model, f.full, {c.n0 + c.loops},
                                                        nullptr, fopts.plan);
            const double base = std::abs(sweep[0].second.op_estimation_error);
            if (fb > base + 1e-6 * (base + 1.0)) pass = false;
            if (fb < 0.9 * base) strict = true;
            detail += f.name + " fb=" + fmt(fb) + " base=" + fmt(base) + " ";
        }
        s.criterion(7, "feedback efficacy vs direct clustering at equal final count",
                    pass && strict, detail + (strict ? "(strict >10% somewhere)" : "(no strict win)"));
    }

    // Criterion 8: the per-RD error distribution is strongly imbalanced when
    // clusters are forced to mix day types.
    {
        const auto& run = *std::find_if(runs.begin(), runs.end(), [](const PipelineRun& r) {
            return r.fixture == "valley-4bus" && r.k == 5;
        });
        std::vector<double> mags;
        for (const auto& [k, e] : run.report.per_rd_errors) mags.push_back(std::abs(e));
        std::sort(mags.begin(), mags.end());
        const double median = mags[mags.size() / 2];
        const double largest = mags.back();
        const bool pass = largest > 0.0 && (median == 0.0 || largest >= 5.0 * median);
        s.criterion(8, "imbalance: largest per-RD error at least 5x the median", pass,
                    "largest " + fmt(largest) + ", median " + fmt(median));
    }

    // Criterion 9: clustering equals the exhaustive greedy-merge oracle.
    {
        bool pass = true;
        int checked = 0;
        for (std::uint64_t seed = 0; seed < 100 && pass; ++seed) {
            testsupport::Rng rng(seed * 7919 + 1);
            const int n = rng.integer(2, 10);
            std::vector<scenario::DayProfile> days;
            for (int i = 0; i < n; ++i) {
                scenario::DayProfile d;
                d.day_id = i;
                d.weight = 1.0;
                for (int t = 0; t < 24; ++t) {
                    d.load_factors[t] = rng.uniform();
                    d.wind_factors[t] = rng.uniform();
                }
                days.push_back(d);
            }
            const auto set = scenario::to_full_set(days);
            const int k = rng.integer(1, n);
            const auto ours = agglomerate(set, k);
            const auto oracle = testsupport::oracle_agglomerate(set, k);
            if (ours.clusters.size() != oracle.clusters.size()) {
                pass = false;
                break;
            }
            for (size_t i = 0; i < ours.clusters.size(); ++i) {
                if (ours.clusters[i].member_day_ids != oracle.clusters[i].member_day_ids)
                    pass = false;
            }
            ++checked;
        }
        s.criterion(9, "agglomerate matches the exhaustive oracle on 100 random instances", pass,
                    std::to_string(checked) + " instances checked");
    }

    // Criterion 10: hand-solvable dispatch problems and dispatch residuals.
    {
        bool pass = true;
        std::string detail = "analytic costs and residuals ok";
        auto check_cost = [&](const SystemModel& m, const scenario::DayProfile& day,
                              double expected, const std::string& what) {
            const InvestmentDecision x{std::vector<bool>(m.candidate_lines.size(), false),
                                       std::vector<bool>(m.candidate_wind.size(), true)};
            const auto r = opcost::op_cost(m, x, scenario::to_full_set({day}));
            const double rel =
                std::abs(r.total - expected) / std::max(std::abs(expected), 1.0);
            if (rel > 1e-8) {
                pass = false;
                detail = what + ": got " + fmt(r.total) + ", want " + fmt(expected);
            }
        };
        // Flat day on one unit; shedding day; congested pair; ramp staircase.
        check_cost(testsupport::one_bus_system(10, 100, 50, 1000),
                   testsupport::flat_day(1.0, 0.0), 12000.0, "1-bus flat");
        check_cost(testsupport::one_bus_system(10, 100, 120, 1000),
                   testsupport::flat_day(1.0, 0.0), 504000.0, "1-bus shed");
        check_cost(testsupport::two_bus_system(), testsupport::flat_day(1.0, 0.0),
                   24.0 * 3650.0, "2-bus congested");
        {
            scenario::DayProfile day;
            day.weight = 1.0;
            for (int t = 0; t < 24; ++t) {
                day.load_factors[t] = t < 12 ? 0.2 : 0.5;
                day.wind_factors[t] = 0.0;
            }
            check_cost(testsupport::one_bus_system(10, 100, 100, 1000, 10), day, 38100.0,
                       "1-bus ramp");
        }
        // Residuals on every dispatch of a fixture run.
        double worst_residual = 0.0;
        for (auto& f : fixtures) {
            const std::uint64_t extremes[] = {
                0, (std::uint64_t{1} << f.model.candidate_count()) - 1};
            for (std::uint64_t i : extremes) {
                const auto x = sysmodel::decision_from_index(f.model, i);
                opcost::OpCostOptions opts;
                opts.keep_dispatches = true;
                const auto r = opcost::op_cost(f.model, x, f.full, opts);
                for (int k = 0; k < f.full.size(); ++k) {
                    const auto& d = r.dispatches[k];
                    worst_residual =
                        std::max(worst_residual,
                                 d.max_balance_residual(f.model, x, f.full.entries[k].features));
                    worst_residual = std::max(worst_residual, d.max_flow_excess(f.model, x));
                }
            }
        }
        if (worst_residual > 1e-6) {
            pass = false;
            detail = "residual " + fmt(worst_residual) + " exceeds 1e-6 MW";
        } else {
            detail += ", max residual " + fmt(worst_residual) + " MW";
        }
        s.criterion(10, "DC-OPF sanity: analytic LPs at 1e-8 and residuals at 1e-6", pass,
                    detail);
    }

    // Criterion 11: pruning never changes the planning outcome.
    {
        bool pass = true;
        std::string detail = "pruned == exhaustive on all fixtures";
        for (auto& f : fixtures) {
            PlanOptions pruned;
            pruned.cache = f.cache.get();
            PlanOptions exhaustive = pruned;
            exhaustive.prune = false;
            const auto a = solve::plan(f.model, f.full, pruned);
            const auto b = solve::plan(f.model, f.full, exhaustive);
            if (!(a.decision == b.decision) || a.total_cost != b.total_cost) {
                pass = false;
                detail = "mismatch on " + f.name;
            }
        }
        s.criterion(11, "enumeration pruning soundness", pass, detail);
    }

    std::printf("%s: %d criterion(s) failed\n", s.failures == 0 ? "OK" : "FAILED", s.failures);
    return s.failures == 0 ? 0 : 1;
}
