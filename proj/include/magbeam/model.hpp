#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "magbeam/errors.hpp"

namespace magbeam {

using Complex = std::complex<double>;
using VectorXcd = Eigen::VectorXcd;
using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;
using MatrixXcd = Eigen::MatrixXcd;

/// One transmitter: total source + coil resistance and optional peak limits.
/// Absent limits mean "no constraint", not a large sentinel.
struct TxCoil {
    double r_ohm = 0.0;
    std::optional<double> v_max_v;  // peak source-voltage magnitude
    std::optional<double> a_max_a;  // peak current magnitude
};

struct RxCoil {
    double r_parasitic_ohm = 0.0;
    double r_load_ohm = 0.0;
};

/// Optional L/C metadata. Self-inductances never enter the steady-state
/// power algebra at resonance; they are carried for documentation and the
/// resonance consistency check only.
struct ResonantTank {
    double l_h = 0.0;
    double c_f = 0.0;
};

/// Raw electrical description of the multi-TX, single-RX system.
/// All quantities are peak (amplitude) phasors; powers are time-averaged.
struct SystemParams {
    double omega = 0.0;              // angular frequency, rad/s
    std::vector<TxCoil> tx;
    RxCoil rx;
    VectorXd m;                      // TX->RX mutual inductances, H (signed)
    MatrixXd m_tx;                   // TX-TX mutual inductances, H, zero diagonal
    std::vector<ResonantTank> resonance;  // empty, or one entry per coil (N TX + RX)

    int size() const { return static_cast<int>(tx.size()); }
    double r0() const { return rx.r_parasitic_ohm + rx.r_load_ohm; }

    /// Throws InvalidParams on any violated structural constraint.
    void validate() const;
};

/// Derived coupling algebra: B = B_bar + j*B_hat, with
///   B_bar = R + (w^2/r0) m m^T   (real symmetric, PSD)
///   B_hat = -w * m_tx            (real symmetric, zero diagonal)
/// The n-th TX source voltage is v_n = b_n^H i, b_n the n-th column of B.
struct SystemModel {
    SystemParams params;
    MatrixXd b_bar;
    MatrixXd b_hat;
    MatrixXcd b;

    int size() const { return params.size(); }
    VectorXcd b_col(int n) const { return b.col(n); }
};

SystemModel build_system(const SystemParams& params);

Complex rx_current(const SystemModel& model, const VectorXcd& i);
double load_power(const SystemModel& model, const VectorXcd& i);
VectorXcd tx_voltages(const SystemModel& model, const VectorXcd& i);
double total_source_power(const SystemModel& model, const VectorXcd& i);
VectorXd per_tx_power(const SystemModel& model, const VectorXcd& i);

enum class ConstraintState { Slack, Binding, Violated };

struct ConstraintCheck {
    std::string name;    // "load_power", "v_3", "i_1", ...
    double value = 0.0;
    double limit = 0.0;
    double rel_margin = 0.0;  // positive = violation amount, relative
    ConstraintState state = ConstraintState::Slack;
};

struct FeasibilityReport {
    std::vector<ConstraintCheck> checks;
    double max_violation = 0.0;  // largest relative violation, 0 if feasible

    bool feasible(double tol = 1e-7) const { return max_violation <= tol; }
    std::vector<std::string> binding_names() const;
};

/// Classifies every (P1) constraint at the given point. Binding means the
/// relative margin is within 1e-5 of zero; violations beyond 1e-5 are
/// flagged as such.
FeasibilityReport check_feasibility(const SystemModel& model, const VectorXcd& i,
                                    double beta0);

enum class SolveStatus { Optimal, Infeasible, MaxIterations };

const char* to_string(SolveStatus s);

struct CurrentSolution {
    VectorXcd currents;
    double load_power = 0.0;
    double total_power = 0.0;
    VectorXd per_tx_power;
    double efficiency = 0.0;
    FeasibilityReport binding;
    SolveStatus status = SolveStatus::Optimal;
};

/// Evaluates all derived quantities of `currents` against `model` and the
/// load-power target.
CurrentSolution make_solution(const SystemModel& model, const VectorXcd& currents,
                              double beta0, SolveStatus status);

} // namespace magbeam
