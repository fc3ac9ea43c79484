#include "rdplan/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "rdplan/errors.hpp"

namespace rdplan::lp {

namespace {
constexpr double kInfty = std::numeric_limits<double>::infinity();
}

int LpProblem::add_var(double lower, double upper, double cost) {
    objective.push_back(cost);
    var_lower.push_back(lower);
    var_upper.push_back(upper);
    return num_vars() - 1;
}

int LpProblem::add_row(std::span<const int> cols, std::span<const double> coeffs, double lower,
                       double upper) {
    for (size_t i = 0; i < cols.size(); ++i) {
        col_index.push_back(cols[i]);
        coeff.push_back(coeffs[i]);
    }
    row_begin.push_back(static_cast<int>(col_index.size()));
    row_lower.push_back(lower);
    row_upper.push_back(upper);
    return num_rows() - 1;
}

LpBackend::Capability SimplexBackend::capability() const {
    return {.max_vars = 200000, .max_rows = 200000, .tolerance = 1e-8};
}

template <typename Fn>
void SimplexBackend::for_col(int j, Fn&& fn) const {
    if (j < n_) {
        for (int k = col_begin_[j]; k < col_begin_[j + 1]; ++k) fn(col_row_[k], col_val_[k]);
    } else {
        fn(j - n_, -1.0);
    }
}

void SimplexBackend::load(LpProblem problem) {
    n_ = problem.num_vars();
    m_ = problem.num_rows();
    total_ = n_ + m_;

    for (int j = 0; j < n_; ++j) {
        if (!(problem.var_lower[j] <= problem.var_upper[j])) {
            throw ValidationError("SimplexBackend: variable " + std::to_string(j) +
                                  " has empty bound interval");
        }
    }
    for (int i = 0; i < m_; ++i) {
        if (!(problem.row_lower[i] <= problem.row_upper[i])) {
            throw ValidationError("SimplexBackend: row " + std::to_string(i) +
                                  " has empty bound interval");
        }
    }

    // CSR -> CSC for the structural block.
    col_begin_.assign(n_ + 1, 0);
    const int nnz = static_cast<int>(problem.col_index.size());
    for (int k = 0; k < nnz; ++k) col_begin_[problem.col_index[k] + 1]++;
    for (int j = 0; j < n_; ++j) col_begin_[j + 1] += col_begin_[j];
    col_row_.assign(nnz, 0);
    col_val_.assign(nnz, 0.0);
    std::vector<int> fill(col_begin_.begin(), col_begin_.end() - 1);
    for (int i = 0; i < m_; ++i) {
        for (int k = problem.row_begin[i]; k < problem.row_begin[i + 1]; ++k) {
            const int j = problem.col_index[k];
            col_row_[fill[j]] = i;
            col_val_[fill[j]] = problem.coeff[k];
            ++fill[j];
        }
    }

    cost_.assign(total_, 0.0);
    lb_.assign(total_, 0.0);
    ub_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) {
        cost_[j] = problem.objective[j];
        lb_[j] = problem.var_lower[j];
        ub_[j] = problem.var_upper[j];
    }
    for (int i = 0; i < m_; ++i) {
        lb_[n_ + i] = problem.row_lower[i];
        ub_[n_ + i] = problem.row_upper[i];
    }

    state_.assign(total_, VState::AtLower);
    basic_var_.assign(m_, -1);
    xval_.assign(total_, 0.0);
    d_.assign(total_, 0.0);
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    alpha_.assign(m_, 0.0);
    rho_.assign(m_, 0.0);
    work_.assign(std::max(total_, m_), 0.0);
    basis_valid_ = false;
    iteration_limit_ = 5000 + 10 * total_;
}

void SimplexBackend::set_row_bounds(std::span<const double> lower,
                                    std::span<const double> upper) {
    if (static_cast<int>(lower.size()) != m_ || static_cast<int>(upper.size()) != m_) {
        throw ValidationError("SimplexBackend: row bound vectors must have one entry per row");
    }
    for (int i = 0; i < m_; ++i) {
        if (!(lower[i] <= upper[i])) {
            throw ValidationError("SimplexBackend: row " + std::to_string(i) +
                                  " has empty bound interval");
        }
        lb_[n_ + i] = lower[i];
        ub_[n_ + i] = upper[i];
    }
    // The basis stays usable: costs and the matrix are untouched.
}

void SimplexBackend::ftran(int j, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for_col(j, [&](int r, double v) {
        const double* brow = binv_.data() + static_cast<size_t>(0);
        for (int i = 0; i < m_; ++i) out[i] += v * brow[static_cast<size_t>(i) * m_ + r];
    });
}

double SimplexBackend::dot_col(int j, const std::vector<double>& dense) const {
    double acc = 0.0;
    for_col(j, [&](int r, double v) { acc += v * dense[r]; });
    return acc;
}

void SimplexBackend::pivot_binv(int r, const std::vector<double>& alpha) {
    double* base = binv_.data();
    double* row_r = base + static_cast<size_t>(r) * m_;
    const double inv_piv = 1.0 / alpha[r];
    for (int i = 0; i < m_; ++i) {
        if (i == r) continue;
        const double f = alpha[i] * inv_piv;
        if (f == 0.0) continue;
        double* row_i = base + static_cast<size_t>(i) * m_;
        for (int k = 0; k < m_; ++k) row_i[k] -= f * row_r[k];
    }
    for (int k = 0; k < m_; ++k) row_r[k] *= inv_piv;
    ++pivots_since_refactor_;
}

bool SimplexBackend::refactorize() {
    ++stats_.refactorizations;
    // Gauss-Jordan on [B | I] with partial pivoting.
    std::vector<double> bmat(static_cast<size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) {
        for_col(basic_var_[r], [&](int i, double v) {
            bmat[static_cast<size_t>(i) * m_ + r] = v;
        });
    }
    std::fill(binv_.begin(), binv_.end(), 0.0);
    for (int i = 0; i < m_; ++i) binv_[static_cast<size_t>(i) * m_ + i] = 1.0;

    for (int col = 0; col < m_; ++col) {
        int piv = col;
        double best = std::abs(bmat[static_cast<size_t>(col) * m_ + col]);
        for (int i = col + 1; i < m_; ++i) {
            const double v = std::abs(bmat[static_cast<size_t>(i) * m_ + col]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best < 1e-12) return false;
        if (piv != col) {
            for (int k = 0; k < m_; ++k) {
                std::swap(bmat[static_cast<size_t>(piv) * m_ + k],
                          bmat[static_cast<size_t>(col) * m_ + k]);
                std::swap(binv_[static_cast<size_t>(piv) * m_ + k],
                          binv_[static_cast<size_t>(col) * m_ + k]);
            }
        }
        const double inv_piv = 1.0 / bmat[static_cast<size_t>(col) * m_ + col];
        for (int k = 0; k < m_; ++k) {
            bmat[static_cast<size_t>(col) * m_ + k] *= inv_piv;
            binv_[static_cast<size_t>(col) * m_ + k] *= inv_piv;
        }
        for (int i = 0; i < m_; ++i) {
            if (i == col) continue;
            const double f = bmat[static_cast<size_t>(i) * m_ + col];
            if (f == 0.0) continue;
            for (int k = 0; k < m_; ++k) {
                bmat[static_cast<size_t>(i) * m_ + k] -= f * bmat[static_cast<size_t>(col) * m_ + k];
                binv_[static_cast<size_t>(i) * m_ + k] -=
                    f * binv_[static_cast<size_t>(col) * m_ + k];
            }
        }
    }
    pivots_since_refactor_ = 0;
    return true;
}

void SimplexBackend::compute_basic_values() {
    std::vector<double>& r = work_;
    std::fill(r.begin(), r.begin() + m_, 0.0);
    for (int j = 0; j < total_; ++j) {
        if (state_[j] == VState::Basic || xval_[j] == 0.0) continue;
        const double xj = xval_[j];
        for_col(j, [&](int i, double v) { r[i] -= v * xj; });
    }
    for (int i = 0; i < m_; ++i) {
        const double* row = binv_.data() + static_cast<size_t>(i) * m_;
        double acc = 0.0;
        for (int k = 0; k < m_; ++k) acc += row[k] * r[k];
        xval_[basic_var_[i]] = acc;
    }
}

void SimplexBackend::refresh_reduced_costs() {
    // y = c_B' B^-1; d_j = c_j - y'a_j.
    std::vector<double> y(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
        const double cb = cost_[basic_var_[i]];
        if (cb == 0.0) continue;
        const double* row = binv_.data() + static_cast<size_t>(i) * m_;
        for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
    }
    for (int j = 0; j < total_; ++j) {
        if (state_[j] == VState::Basic) {
            d_[j] = 0.0;
        } else {
            d_[j] = cost_[j] - dot_col(j, y);
        }
    }
}

double SimplexBackend::objective_value() const {
    double acc = 0.0;
    for (int j = 0; j < n_; ++j) acc += cost_[j] * xval_[j];
    return acc;
}

void SimplexBackend::set_logical_basis() {
    for (int j = 0; j < n_; ++j) {
        if (lb_[j] > -kInfty) {
            state_[j] = VState::AtLower;
            xval_[j] = lb_[j];
        } else if (ub_[j] < kInfty) {
            state_[j] = VState::AtUpper;
            xval_[j] = ub_[j];
        } else {
            state_[j] = VState::Free;
            xval_[j] = 0.0;
        }
    }
    for (int i = 0; i < m_; ++i) {
        basic_var_[i] = n_ + i;
        state_[n_ + i] = VState::Basic;
    }
    // B = -I inverts to itself.
    std::fill(binv_.begin(), binv_.end(), 0.0);
    for (int i = 0; i < m_; ++i) binv_[static_cast<size_t>(i) * m_ + i] = -1.0;
    pivots_since_refactor_ = 0;
}

void SimplexBackend::snap_nonbasic_to_bounds() {
    for (int j = 0; j < total_; ++j) {
        switch (state_[j]) {
            case VState::Basic:
                break;
            case VState::AtLower:
                if (lb_[j] > -kInfty) {
                    xval_[j] = lb_[j];
                } else if (ub_[j] < kInfty) {
                    state_[j] = VState::AtUpper;
                    xval_[j] = ub_[j];
                } else {
                    state_[j] = VState::Free;
                    xval_[j] = 0.0;
                }
                break;
            case VState::AtUpper:
                if (ub_[j] < kInfty) {
                    xval_[j] = ub_[j];
                } else if (lb_[j] > -kInfty) {
                    state_[j] = VState::AtLower;
                    xval_[j] = lb_[j];
                } else {
                    state_[j] = VState::Free;
                    xval_[j] = 0.0;
                }
                break;
            case VState::Free:
                xval_[j] = 0.0;
                break;
        }
    }
}

namespace {

struct RatioHit {
    double step = kInfty;
    int row = -1;        // leaving basic row, -1 when the entering bound flip wins
    bool to_upper = false;
};

}  // namespace

// Primal phase 1: drive the sum of bound violations of the basics to zero.
// Reduced costs are re-priced every iteration because the phase-1 gradient
// depends on which basics are currently infeasible.
LpStatus SimplexBackend::primal_phase1(int& iters) {
    const double ptol = opt_.primal_tol;
    int stall = 0;

    while (true) {
        if (iters > iteration_limit_) return LpStatus::IterationLimit;

        double infeas = 0.0;
        for (int i = 0; i < m_; ++i) {
            const int p = basic_var_[i];
            if (xval_[p] < lb_[p] - ptol) infeas += lb_[p] - xval_[p];
            if (xval_[p] > ub_[p] + ptol) infeas += xval_[p] - ub_[p];
        }
        if (infeas <= ptol) return LpStatus::Optimal;

        // Phase-1 pricing: y = c1_B' B^-1 with c1 = -1 below, +1 above.
        std::vector<double> y(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            const int p = basic_var_[i];
            double c1 = 0.0;
            if (xval_[p] < lb_[p] - ptol) c1 = -1.0;
            else if (xval_[p] > ub_[p] + ptol) c1 = 1.0;
            if (c1 == 0.0) continue;
            const double* row = binv_.data() + static_cast<size_t>(i) * m_;
            for (int k = 0; k < m_; ++k) y[k] += c1 * row[k];
        }

        const bool bland = stall >= opt_.stall_limit;
        int q = -1;
        double best_score = opt_.dual_tol;
        int dir = 0;
        for (int j = 0; j < total_; ++j) {
            if (state_[j] == VState::Basic) continue;
            if (lb_[j] == ub_[j]) continue;  // fixed
            const double dj = -dot_col(j, y);
            double score = 0.0;
            int cand_dir = 0;
            if (state_[j] == VState::AtLower && dj < -opt_.dual_tol) {
                score = -dj;
                cand_dir = +1;
            } else if (state_[j] == VState::AtUpper && dj > opt_.dual_tol) {
                score = dj;
                cand_dir = -1;
            } else if (state_[j] == VState::Free && std::abs(dj) > opt_.dual_tol) {
                score = std::abs(dj);
                cand_dir = dj < 0 ? +1 : -1;
            } else {
                continue;
            }
            if (bland) {
                q = j;
                dir = cand_dir;
                break;
            }
            if (score > best_score) {
                best_score = score;
                q = j;
                dir = cand_dir;
            }
        }
        if (q < 0) return LpStatus::Infeasible;  // phase-1 optimum with residual infeasibility

        ftran(q, alpha_);

        // First-breakpoint ratio test; infeasible basics may also leave at the
        // bound they are approaching.
        RatioHit hit;
        double hit_pivot = 0.0;
        for (int i = 0; i < m_; ++i) {
            const int p = basic_var_[i];
            const double beta = -dir * alpha_[i];  // d x_p / d t
            if (std::abs(beta) < opt_.pivot_tol) continue;
            const double v = xval_[p];
            double limit = kInfty;
            bool to_upper = false;
            if (v < lb_[p] - ptol) {
                if (beta > 0.0) {
                    limit = (lb_[p] - v) / beta;
                    to_upper = false;
                }
            } else if (v > ub_[p] + ptol) {
                if (beta < 0.0) {
                    limit = (ub_[p] - v) / beta;
                    to_upper = true;
                }
            } else {
                if (beta > 0.0 && ub_[p] < kInfty) {
                    limit = (ub_[p] - v) / beta;
                    to_upper = true;
                } else if (beta < 0.0 && lb_[p] > -kInfty) {
                    limit = (lb_[p] - v) / beta;
                    to_upper = false;
                }
            }
            if (limit < -1e-12) limit = 0.0;
            limit = std::max(limit, 0.0);
            if (limit < hit.step - 1e-12 ||
                (limit < hit.step + 1e-12 &&
                 (std::abs(alpha_[i]) > hit_pivot ||
                  (std::abs(alpha_[i]) == hit_pivot && hit.row >= 0 && p < basic_var_[hit.row])))) {
                hit.step = limit;
                hit.row = i;
                hit.to_upper = to_upper;
                hit_pivot = std::abs(alpha_[i]);
            }
        }
        const double own_span =
            (lb_[q] > -kInfty && ub_[q] < kInfty) ? ub_[q] - lb_[q] : kInfty;
        if (own_span < hit.step - 1e-12) {
            // Bound flip.
            const double delta = dir * own_span;
            for (int i = 0; i < m_; ++i) xval_[basic_var_[i]] -= delta * alpha_[i];
            state_[q] = state_[q] == VState::AtLower ? VState::AtUpper : VState::AtLower;
            xval_[q] = state_[q] == VState::AtLower ? lb_[q] : ub_[q];
            ++iters;
            ++stats_.primal_iterations;
            stall = own_span < 1e-11 ? stall + 1 : 0;
            continue;
        }
        if (hit.row < 0) {
            // No finite breakpoint: numerical trouble, a refactor usually cures it.
            if (pivots_since_refactor_ > 0 && refactorize()) {
                compute_basic_values();
                continue;
            }
            return LpStatus::IterationLimit;
        }

        const int r = hit.row;
        const int p = basic_var_[r];
        const double delta = dir * hit.step;
        for (int i = 0; i < m_; ++i) xval_[basic_var_[i]] -= delta * alpha_[i];
        xval_[q] += delta;
        xval_[p] = hit.to_upper ? ub_[p] : lb_[p];
        state_[p] = hit.to_upper ? VState::AtUpper : VState::AtLower;
        state_[q] = VState::Basic;
        basic_var_[r] = q;
        pivot_binv(r, alpha_);
        ++iters;
        ++stats_.primal_iterations;
        stall = hit.step < 1e-11 ? stall + 1 : 0;

        if (pivots_since_refactor_ >= opt_.refactor_every) {
            if (!refactorize()) return LpStatus::IterationLimit;
            compute_basic_values();
        }
    }
}

LpStatus SimplexBackend::primal_phase2(int& iters) {
    refresh_reduced_costs();
    int stall = 0;

    while (true) {
        if (iters > iteration_limit_) return LpStatus::IterationLimit;

        const bool bland = stall >= opt_.stall_limit;
        int q = -1;
        double best_score = opt_.dual_tol;
        int dir = 0;
        for (int j = 0; j < total_; ++j) {
            if (state_[j] == VState::Basic) continue;
            if (lb_[j] == ub_[j]) continue;
            const double dj = d_[j];
            double score = 0.0;
            int cand_dir = 0;
            if (state_[j] == VState::AtLower && dj < -opt_.dual_tol) {
                score = -dj;
                cand_dir = +1;
            } else if (state_[j] == VState::AtUpper && dj > opt_.dual_tol) {
                score = dj;
                cand_dir = -1;
            } else if (state_[j] == VState::Free && std::abs(dj) > opt_.dual_tol) {
                score = std::abs(dj);
                cand_dir = dj < 0 ? +1 : -1;
            } else {
                continue;
            }
            if (bland) {
                q = j;
                dir = cand_dir;
                break;
            }
            if (score > best_score) {
                best_score = score;
                q = j;
                dir = cand_dir;
            }
        }
        if (q < 0) return LpStatus::Optimal;

        ftran(q, alpha_);

        RatioHit hit;
        double hit_pivot = 0.0;
        for (int i = 0; i < m_; ++i) {
            const int p = basic_var_[i];
            const double beta = -dir * alpha_[i];
            if (std::abs(beta) < opt_.pivot_tol) continue;
            const double v = xval_[p];
            double limit = kInfty;
            bool to_upper = false;
            if (beta > 0.0 && ub_[p] < kInfty) {
                limit = (ub_[p] - v) / beta;
                to_upper = true;
            } else if (beta < 0.0 && lb_[p] > -kInfty) {
                limit = (lb_[p] - v) / beta;
                to_upper = false;
            }
            if (limit == kInfty) continue;
            if (limit < 0.0) limit = 0.0;  // tolerate ptol-level overshoot
            if (limit < hit.step - 1e-12 ||
                (limit < hit.step + 1e-12 &&
                 (std::abs(alpha_[i]) > hit_pivot ||
                  (std::abs(alpha_[i]) == hit_pivot && hit.row >= 0 && p < basic_var_[hit.row])))) {
                hit.step = limit;
                hit.row = i;
                hit.to_upper = to_upper;
                hit_pivot = std::abs(alpha_[i]);
            }
        }
        const double own_span =
            (lb_[q] > -kInfty && ub_[q] < kInfty) ? ub_[q] - lb_[q] : kInfty;
        if (own_span < hit.step - 1e-12) {
            const double delta = dir * own_span;
            for (int i = 0; i < m_; ++i) xval_[basic_var_[i]] -= delta * alpha_[i];
            state_[q] = state_[q] == VState::AtLower ? VState::AtUpper : VState::AtLower;
            xval_[q] = state_[q] == VState::AtLower ? lb_[q] : ub_[q];
            ++iters;
            ++stats_.primal_iterations;
            stall = own_span < 1e-11 ? stall + 1 : 0;
            continue;
        }
        if (hit.row < 0) return LpStatus::Unbounded;

        const int r = hit.row;
        const int p = basic_var_[r];
        const double delta = dir * hit.step;
        for (int i = 0; i < m_; ++i) xval_[basic_var_[i]] -= delta * alpha_[i];
        xval_[q] += delta;
        xval_[p] = hit.to_upper ? ub_[p] : lb_[p];

        // Pivot-row based update of the reduced costs.
        const double* brow = binv_.data() + static_cast<size_t>(r) * m_;
        std::copy(brow, brow + m_, rho_.begin());
        const double theta = d_[q] / alpha_[r];
        if (theta != 0.0) {
            for (int j = 0; j < total_; ++j) {
                if (state_[j] == VState::Basic || j == q) continue;
                const double wj = dot_col(j, rho_);
                if (wj != 0.0) d_[j] -= theta * wj;
            }
        }
        d_[p] = -theta;
        d_[q] = 0.0;

        state_[p] = hit.to_upper ? VState::AtUpper : VState::AtLower;
        state_[q] = VState::Basic;
        basic_var_[r] = q;
        pivot_binv(r, alpha_);
        ++iters;
        ++stats_.primal_iterations;
        stall = hit.step < 1e-11 ? stall + 1 : 0;

        if (pivots_since_refactor_ >= opt_.refactor_every) {
            if (!refactorize()) return LpStatus::IterationLimit;
            compute_basic_values();
            refresh_reduced_costs();
        }
    }
}

// Dual simplex: used after RHS changes, starting from a dual-feasible basis.
LpStatus SimplexBackend::dual_simplex(int& iters) {
    const double ptol = opt_.primal_tol;
    int stall = 0;

    while (true) {
        if (iters > iteration_limit_) return LpStatus::IterationLimit;

        int r = -1;
        double worst = ptol;
        bool below = false;
        for (int i = 0; i < m_; ++i) {
            const int p = basic_var_[i];
            const double lo_viol = lb_[p] - xval_[p];
            const double hi_viol = xval_[p] - ub_[p];
            if (lo_viol > worst) {
                worst = lo_viol;
                r = i;
                below = true;
            }
            if (hi_viol > worst) {
                worst = hi_viol;
                r = i;
                below = false;
            }
        }
        if (r < 0) return LpStatus::Optimal;

        const int p = basic_var_[r];
        const double* brow = binv_.data() + static_cast<size_t>(r) * m_;
        std::copy(brow, brow + m_, rho_.begin());

        // Entering choice: smallest dual ratio |d_j| / |w_j| among sign-eligible
        // columns keeps the reduced costs dual feasible.
        const bool bland = stall >= opt_.stall_limit;
        const int want = below ? +1 : -1;  // direction x_p must move
        int q = -1;
        double best_ratio = kInfty;
        double best_w = 0.0;
        double wq = 0.0;
        for (int j = 0; j < total_; ++j) {
            if (state_[j] == VState::Basic) continue;
            if (lb_[j] == ub_[j]) continue;
            const double wj = dot_col(j, rho_);
            if (std::abs(wj) < opt_.pivot_tol) continue;
            bool eligible = false;
            if (state_[j] == VState::AtLower) {
                eligible = want * wj < 0.0;
            } else if (state_[j] == VState::AtUpper) {
                eligible = want * wj > 0.0;
            } else {  // Free
                eligible = true;
            }
            if (!eligible) continue;
            const double ratio = std::abs(d_[j]) / std::abs(wj);
            const bool better =
                bland ? (q < 0 || j < q)
                      : (ratio < best_ratio - 1e-12 ||
                         (ratio < best_ratio + 1e-12 && std::abs(wj) > std::abs(best_w)));
            if (better) {
                q = j;
                best_ratio = ratio;
                best_w = wj;
                wq = wj;
            }
        }
        if (q < 0) return LpStatus::Infeasible;  // dual unbounded

        ftran(q, alpha_);
        if (std::abs(alpha_[r]) < opt_.pivot_tol) {
            if (pivots_since_refactor_ > 0 && refactorize()) {
                compute_basic_values();
                refresh_reduced_costs();
                continue;
            }
            return LpStatus::IterationLimit;
        }

        const double target = below ? lb_[p] : ub_[p];
        const double delta_q = (xval_[p] - target) / alpha_[r];
        for (int i = 0; i < m_; ++i) xval_[basic_var_[i]] -= delta_q * alpha_[i];
        xval_[q] += delta_q;
        xval_[p] = target;

        const double theta = d_[q] / wq;
        if (theta != 0.0) {
            for (int j = 0; j < total_; ++j) {
                if (state_[j] == VState::Basic || j == q) continue;
                const double wj = dot_col(j, rho_);
                if (wj != 0.0) d_[j] -= theta * wj;
            }
        }
        d_[p] = -theta;
        d_[q] = 0.0;

        state_[p] = below ? VState::AtLower : VState::AtUpper;
        state_[q] = VState::Basic;
        basic_var_[r] = q;
        pivot_binv(r, alpha_);
        ++iters;
        ++stats_.dual_iterations;
        stall = std::abs(delta_q) < 1e-11 ? stall + 1 : 0;

        if (pivots_since_refactor_ >= opt_.refactor_every) {
            if (!refactorize()) return LpStatus::IterationLimit;
            compute_basic_values();
            refresh_reduced_costs();
        }
    }
}

LpStatus SimplexBackend::cold_solve(int& iters) {
    ++stats_.cold_solves;
    set_logical_basis();
    compute_basic_values();
    LpStatus st = primal_phase1(iters);
    if (st != LpStatus::Optimal) return st;
    return primal_phase2(iters);
}

LpSolution SimplexBackend::finish(LpStatus status, int iters) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iters;
    basis_valid_ = status == LpStatus::Optimal;
    if (status != LpStatus::Optimal) return sol;

    sol.objective = objective_value();
    sol.x.assign(xval_.begin(), xval_.begin() + n_);

    // Duals: y = c_B' B^-1; the logical for row i prices that row.
    std::vector<double> y(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
        const double cb = cost_[basic_var_[i]];
        if (cb == 0.0) continue;
        const double* row = binv_.data() + static_cast<size_t>(i) * m_;
        for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
    }
    sol.row_dual.assign(y.begin(), y.end());
    sol.reduced_cost.resize(n_);
    for (int j = 0; j < n_; ++j) {
        sol.reduced_cost[j] = state_[j] == VState::Basic ? 0.0 : cost_[j] - dot_col(j, y);
    }
    return sol;
}

LpSolution SimplexBackend::solve() {
    if (m_ == 0 && n_ == 0) {
        LpSolution sol;
        sol.status = LpStatus::Optimal;
        return sol;
    }
    int iters = 0;
    LpStatus st;
    if (basis_valid_) {
        ++stats_.warm_solves;
        snap_nonbasic_to_bounds();
        compute_basic_values();
        refresh_reduced_costs();
        st = dual_simplex(iters);
        if (st == LpStatus::IterationLimit) {
            // Robust fallback: full cold solve.
            ++stats_.fallbacks;
            st = cold_solve(iters);
        }
    } else {
        st = cold_solve(iters);
    }
    if (st == LpStatus::IterationLimit) {
        // One more attempt from scratch with Bland-biased pricing.
        ++stats_.fallbacks;
        const int keep = opt_.stall_limit;
        opt_.stall_limit = 0;
        iteration_limit_ *= 4;
        st = cold_solve(iters);
        opt_.stall_limit = keep;
    }
    return finish(st, iters);
}

LpBackendFactory default_backend_factory() {
    return []() { return std::make_unique<SimplexBackend>(); };
}

}  // namespace rdplan::lp
