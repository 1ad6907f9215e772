#pragma once

#include <vector>

#include "magbeam/ipm.hpp"
#include "magbeam/model.hpp"

namespace magbeam {

/// Lifted formulation of the full current-design problem: minimize
/// Re<(1/2) B_bar, X> over Hermitian PSD X subject to
///   Re<m m^H, X> >= 2 r0^2 beta0 / (w^2 r_l0)          (load power)
///   Re<b_n b_n^H, X> <= V_n^2                          (peak voltage)
///   Re<Q_n, X>       <= A_n^2                          (peak current)
/// Constraints with absent limits are omitted.
struct SdpProblem {
    MatrixXcd objective;          // (1/2) B_bar
    MatrixXcd power_matrix;       // m m^H
    VectorXd m;                   // coupling vector behind power_matrix
    double power_threshold = 0.0;
    std::vector<TraceConstraint> constraints;  // power first, then voltage, then current
    std::vector<int> voltage_tx;  // TX index behind constraints[1 + k], k < voltage_tx.size()
    std::vector<int> current_tx;
    double beta0 = 0.0;
    bool fully_limited = false;   // every TX carries at least one finite limit
};

struct SdrSolution {
    MatrixXcd x;             // Hermitian PSD optimum of the relaxation
    double lambda = 0.0;     // load-power dual
    VectorXd rho;            // voltage duals, one per TX (0 where no limit)
    VectorXd mu;             // current duals, one per TX
    MatrixXcd s;             // dual slack matrix
    double gap = 0.0;        // relative duality gap
    double rank_ratio = 0.0; // lambda_2(X) / lambda_1(X)
    VectorXcd currents;      // extracted rank-one factor
    double objective = 0.0;
    IpmStatus status = IpmStatus::MaxIterations;
};

/// How to hand the Hermitian problem to the interior-point core: directly,
/// or through the 2N x 2N real symmetric embedding
/// E(P + jQ) = [[P, -Q], [Q, P]]. Both routes agree to solver accuracy and
/// are cross-checked in the tests.
enum class SdpFormulation { Hermitian, RealEmbedding };

SdpProblem formulate(const SystemModel& model, double beta0);

SdrSolution solve_sdr(const SdpProblem& problem, double tol = 1e-7,
                      SdpFormulation form = SdpFormulation::Hermitian);

/// Dominant-eigenpair factor of X, phase-canonicalized so that m^H i is
/// real and nonnegative. Throws RankDeficiencyUnexpected when the second
/// eigenvalue is not negligible.
VectorXcd extract_rank_one(const SdpProblem& problem, SdrSolution& sdr);

struct KktReport {
    double stationarity = 0.0;        // ||C - lambda M + sum rho B_n + sum mu Q_n - S|| rel
    double complementarity = 0.0;     // ||S X|| / (||S|| ||X||)
    double primal_feasibility = 0.0;  // worst relative constraint violation
    double dual_feasibility = 0.0;    // most negative multiplier / eigenvalue, relative
    double shifted_min_eig = 0.0;     // lambda_min of C + sum rho B_n + sum mu Q_n, rel
    double rank_ratio = 0.0;
    double max_residual() const;
};

KktReport verify_kkt(const SystemModel& model, double beta0, const SdrSolution& sdr);

/// Full pipeline: formulate -> solve_sdr -> extract_rank_one -> feasibility.
CurrentSolution solve_p1(const SystemModel& model, double beta0, double tol = 1e-7,
                         SdpFormulation form = SdpFormulation::Hermitian);

/// Largest deliverable load power under the peak limits, by bisection on
/// feasibility of solve_p1 to relative width 1e-6. Throws Unbounded when
/// no TX has a finite limit.
std::pair<double, CurrentSolution> max_deliverable_power(const SystemModel& model,
                                                         double tol = 1e-7);

} // namespace magbeam
