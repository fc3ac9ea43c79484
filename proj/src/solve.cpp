#include "rdplan/solve.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "rdplan/errors.hpp"

namespace rdplan::solve {

namespace {

struct Evaluation {
    double invest = 0.0;
    double op = 0.0;
    double total = std::numeric_limits<double>::infinity();
    bool pruned = true;
};

}  // namespace

PlanResult plan(const SystemModel& m, const ScenarioSet& set, const PlanOptions& options) {
    const int n = m.candidate_count();
    if (n > options.enum_limit) {
        throw CapacityError("plan: " + std::to_string(n) +
                            " candidates exceed the enumeration limit of " +
                            std::to_string(options.enum_limit) +
                            "; raise --enum-limit to override");
    }
    const std::uint64_t count = 1ull << n;

    opcost::OpCostOptions op_opts;
    op_opts.backend = options.backend;
    op_opts.cache = options.cache;

    std::vector<Evaluation> evals(count);
    const int jobs = std::max(1, options.jobs);

    if (jobs == 1) {
        // Sequential lexicographic sweep; pruning on invest cost alone is safe
        // because operational cost is non-negative and earlier decisions are
        // lexicographically smaller.
        double best_total = std::numeric_limits<double>::infinity();
        for (std::uint64_t i = 0; i < count; ++i) {
            const InvestmentDecision x = sysmodel::decision_from_index(m, i);
            const double invest = sysmodel::invest_cost(m, x);
            if (options.prune && invest >= best_total) continue;
            const double op = opcost::op_cost(m, x, set, op_opts).total;
            evals[i] = {invest, op, invest + op, false};
            best_total = std::min(best_total, evals[i].total);
        }
    } else {
        // Parallel sweep: strict-inequality pruning keeps the outcome identical
        // regardless of completion order; the minimum is reduced in index order
        // afterwards.
        std::atomic<std::uint64_t> next{0};
        std::atomic<double> best_total{std::numeric_limits<double>::infinity()};
        std::vector<std::thread> pool;
        std::mutex fail_mutex;
        std::exception_ptr failure;
        for (int t = 0; t < jobs; ++t) {
            pool.emplace_back([&] {
                try {
                    while (true) {
                        const std::uint64_t i = next.fetch_add(1);
                        if (i >= count) return;
                        const InvestmentDecision x = sysmodel::decision_from_index(m, i);
                        const double invest = sysmodel::invest_cost(m, x);
                        if (options.prune && invest > best_total.load()) continue;
                        const double op = opcost::op_cost(m, x, set, op_opts).total;
                        evals[i] = {invest, op, invest + op, false};
                        double seen = best_total.load();
                        while (evals[i].total < seen &&
                               !best_total.compare_exchange_weak(seen, evals[i].total)) {
                        }
                    }
                } catch (...) {
                    std::lock_guard lock(fail_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::uint64_t best_index = count;
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < count; ++i) {
        if (!evals[i].pruned && evals[i].total < best) {
            best = evals[i].total;
            best_index = i;
        }
    }
    if (best_index == count) {
        throw BackendError("plan: no decision could be evaluated");
    }

    PlanResult res;
    res.decision = sysmodel::decision_from_index(m, best_index);
    res.invest_cost = evals[best_index].invest;
    res.op_cost = evals[best_index].op;
    res.total_cost = evals[best_index].total;
    if (options.keep_trace) {
        for (std::uint64_t i = 0; i < count; ++i) {
            if (evals[i].pruned) continue;
            res.per_decision_trace.push_back({sysmodel::decision_from_index(m, i),
                                              evals[i].invest, evals[i].op, evals[i].total});
        }
    }
    return res;
}

PlanResult reference_solution(const SystemModel& m, const ScenarioSet& full,
                              const PlanOptions& options) {
    return plan(m, full, options);
}

double evaluate_fixed(const SystemModel& m, const InvestmentDecision& x, const ScenarioSet& full,
                      const PlanOptions& options) {
    opcost::OpCostOptions op_opts;
    op_opts.backend = options.backend;
    op_opts.cache = options.cache;
    return sysmodel::invest_cost(m, x) + opcost::op_cost(m, x, full, op_opts).total;
}

}  // namespace rdplan::solve
