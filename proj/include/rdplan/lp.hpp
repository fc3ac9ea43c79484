#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace rdplan::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sparse LP in the form
///   min c'x  s.t.  row_lower <= A x <= row_upper,  var_lower <= x <= var_upper.
/// Equality rows have row_lower == row_upper.
struct LpProblem {
    std::vector<double> objective;
    std::vector<double> var_lower;
    std::vector<double> var_upper;

    // Rows in CSR layout.
    std::vector<int> row_begin{0};
    std::vector<int> col_index;
    std::vector<double> coeff;
    std::vector<double> row_lower;
    std::vector<double> row_upper;

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_rows() const { return static_cast<int>(row_lower.size()); }

    /// Adds a variable, returns its index.
    int add_var(double lower, double upper, double cost);
    /// Adds a row sum(coeffs[i] * x[cols[i]]) within [lower, upper], returns its index.
    int add_row(std::span<const int> cols, std::span<const double> coeffs, double lower,
                double upper);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
    LpStatus status = LpStatus::IterationLimit;
    double objective = 0.0;
    std::vector<double> x;             // primal values, size num_vars
    std::vector<double> row_dual;      // dual prices, size num_rows
    std::vector<double> reduced_cost;  // size num_vars
    int iterations = 0;
};

/// Minimal solver contract: load a problem, optionally swap row bounds
/// (the matrix, objective and variable bounds stay fixed), and solve.
/// Implementations may keep internal state between solves to warm start.
class LpBackend {
public:
    struct Capability {
        int max_vars = 0;
        int max_rows = 0;
        double tolerance = 0.0;
    };

    virtual ~LpBackend() = default;
    virtual Capability capability() const = 0;
    virtual void load(LpProblem problem) = 0;
    virtual void set_row_bounds(std::span<const double> lower, std::span<const double> upper) = 0;
    virtual LpSolution solve() = 0;
};

using LpBackendFactory = std::function<std::unique_ptr<LpBackend>()>;

/// Factory for the built-in reference backend.
LpBackendFactory default_backend_factory();

}  // namespace rdplan::lp
