#pragma once

#include <vector>

#include "magbeam/model.hpp"

namespace magbeam {

/// One linear trace constraint Re<A, X> >= bound (lower) or <= bound.
/// A must be Hermitian.
struct TraceConstraint {
    MatrixXcd a;
    double bound = 0.0;
    bool lower = false;
};

enum class IpmStatus { Optimal, Infeasible, MaxIterations };

struct IpmOptions {
    double tol = 1e-10;       // relative duality gap
    double feas_tol = 1e-10;  // relative primal/dual residuals
    int max_iters = 150;
};

struct IpmResult {
    IpmStatus status = IpmStatus::MaxIterations;
    MatrixXcd x;              // primal Hermitian PSD matrix
    MatrixXcd s;              // dual slack C - sum_i lambda_i^signed A_i
    VectorXd multipliers;     // conventional-sign Lagrange multipliers, >= 0
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double gap = 0.0;         // relative duality gap
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
};

/// Minimizes Re<C, X> over Hermitian X >= 0 subject to the given trace
/// inequalities, with a Mehrotra predictor-corrector path-following method
/// (HKM direction, dense linear algebra). Inequalities are handled through
/// nonnegative slack scalars appended to the cone.
IpmResult minimize_trace_sdp(const MatrixXcd& c, const std::vector<TraceConstraint>& cons,
                             const IpmOptions& opt = {});

} // namespace magbeam
