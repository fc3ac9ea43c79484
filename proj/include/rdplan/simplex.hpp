#pragma once

#include <cstdint>
#include <vector>

#include "rdplan/lp.hpp"

namespace rdplan::lp {

/// Reference LP backend: bounded-variable revised simplex with a dense
/// basis inverse. Cold solves run primal phase 1 + 2; after set_row_bounds
/// the previous basis stays dual-feasible (costs and matrix are unchanged),
/// so re-solves run the dual simplex from it.
class SimplexBackend final : public LpBackend {
public:
    struct Options {
        double primal_tol = 1e-8;
        double dual_tol = 1e-9;
        double pivot_tol = 1e-9;
        int refactor_every = 120;
        int stall_limit = 40;
    };

    struct Stats {
        long cold_solves = 0;
        long warm_solves = 0;
        long primal_iterations = 0;
        long dual_iterations = 0;
        long refactorizations = 0;
        long fallbacks = 0;
    };

    SimplexBackend() : SimplexBackend(Options{}) {}
    explicit SimplexBackend(Options options) : opt_(options) {}

    Capability capability() const override;
    void load(LpProblem problem) override;
    void set_row_bounds(std::span<const double> lower, std::span<const double> upper) override;
    LpSolution solve() override;

    const Stats& stats() const { return stats_; }

private:
    enum class VState : std::uint8_t { Basic, AtLower, AtUpper, Free };

    Options opt_;
    Stats stats_;

    // Problem in augmented form: structural vars 0..n-1, one logical per row
    // at n+i, constraint A x - s = 0 with the row bounds carried by s.
    int n_ = 0;
    int m_ = 0;
    int total_ = 0;
    std::vector<int> col_begin_, col_row_;
    std::vector<double> col_val_;
    std::vector<double> cost_, lb_, ub_;

    std::vector<VState> state_;
    std::vector<int> basic_var_;
    std::vector<double> xval_, d_, binv_;
    bool basis_valid_ = false;
    int pivots_since_refactor_ = 0;
    int iteration_limit_ = 0;

    // Scratch
    std::vector<double> alpha_, rho_, work_;

    template <typename Fn>
    void for_col(int j, Fn&& fn) const;
    void ftran(int j, std::vector<double>& out) const;
    double dot_col(int j, const std::vector<double>& dense) const;
    void pivot_binv(int r, const std::vector<double>& alpha);
    bool refactorize();
    void compute_basic_values();
    void refresh_reduced_costs();
    double objective_value() const;
    void set_logical_basis();
    void snap_nonbasic_to_bounds();

    LpStatus primal_phase1(int& iters);
    LpStatus primal_phase2(int& iters);
    LpStatus dual_simplex(int& iters);
    LpStatus cold_solve(int& iters);
    LpSolution finish(LpStatus status, int iters);
};

}  // namespace rdplan::lp
