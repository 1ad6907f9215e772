#pragma once

#include "magbeam/model.hpp"

namespace magbeam {

/// Solution of the load-power-only problem: the optimal currents are real
/// and lie along the null eigenvector of
///   T(v) = R + w^2 (r0 - v r_l0) / r0^2 * m m^T
/// at the dual value v* where the smallest eigenvalue of T crosses zero.
struct ClosedFormSolution {
    VectorXd currents;     // real optimal currents, sign chosen so m^T i >= 0
    double dual_v = 0.0;   // v*, equals 1/efficiency at the optimum
    double alpha = 0.0;    // scaling such that the load-power constraint is tight
    VectorXd eigvec;       // unit null eigenvector of T(v*)
    double duality_gap = 0.0;  // |objective - beta0 * v*| / objective
    CurrentSolution solution;
};

/// Minimizes total source power subject only to load power >= beta0, via
/// bisection on the dual variable. Requires m != 0 and positive TX
/// resistances.
ClosedFormSolution solve_unconstrained(const SystemModel& model, double beta0);

/// Identical-TX-resistance special case: currents proportional to m, dual
/// value in closed form. Agrees with solve_unconstrained to 1e-9.
ClosedFormSolution solve_identical_r(const SystemModel& model, double beta0);

} // namespace magbeam
