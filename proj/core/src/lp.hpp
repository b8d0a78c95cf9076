#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace funcdec::detail {

enum class LpStatus { Optimal, Infeasible, IterationLimit };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
    double infeasibility = 0.0;   // phase-1 residual sum at termination
};

struct LpOptions {
    double feas_tol = 1e-7;       // residual tolerance on (row-scaled) constraints
    double opt_tol = 1e-9;        // reduced-cost tolerance
    double pivot_tol = 1e-11;
    std::size_t max_iter = 50000;
};

// min c'x  s.t.  A x = b,  lo <= x <= hi  (all bounds finite).
// Bounded-variable primal simplex on a dense tableau: phase 1 with one
// artificial per row, then phase 2 when `c` is non-empty. Rows are scaled
// to unit max-norm internally.
LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                  const Eigen::VectorXd& c, const LpOptions& opt = {});

} // namespace funcdec::detail
