#include "magbeam/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace magbeam {

namespace {

constexpr double kSymmetryTol = 1e-12;      // absolute, on matrix entries
constexpr double kResonanceTol = 1e-9;      // |w^2 L C - 1|
constexpr double kBindingTol = 1e-5;        // relative margin classification

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidParams(msg);
}

} // namespace

void SystemParams::validate() const {
    const int n = size();
    require(n >= 1, "at least one TX is required");
    require(omega > 0.0, "omega must be positive");
    for (int k = 0; k < n; ++k) {
        require(tx[k].r_ohm > 0.0, "tx[" + std::to_string(k) + "].r_ohm must be positive");
        if (tx[k].v_max_v) require(*tx[k].v_max_v > 0.0, "tx v_max must be positive");
        if (tx[k].a_max_a) require(*tx[k].a_max_a > 0.0, "tx a_max must be positive");
    }
    require(rx.r_parasitic_ohm >= 0.0, "rx parasitic resistance must be >= 0");
    require(rx.r_load_ohm > 0.0, "rx load resistance must be positive");
    require(m.size() == n, "m must have one entry per TX");
    require(m_tx.rows() == n && m_tx.cols() == n, "m_tx must be N x N");
    for (int r = 0; r < n; ++r) {
        require(std::abs(m_tx(r, r)) <= kSymmetryTol, "m_tx diagonal must be zero");
        for (int c = r + 1; c < n; ++c) {
            require(std::abs(m_tx(r, c) - m_tx(c, r)) <= kSymmetryTol,
                    "m_tx must be symmetric (entry " + std::to_string(r) + "," +
                        std::to_string(c) + ")");
        }
    }
    if (!resonance.empty()) {
        require(static_cast<int>(resonance.size()) == n + 1,
                "resonance block must list all N TX coils plus the RX coil");
        for (size_t k = 0; k < resonance.size(); ++k) {
            const auto& t = resonance[k];
            require(t.l_h > 0.0 && t.c_f > 0.0, "resonance L and C must be positive");
            const double detune = std::abs(omega * omega * t.l_h * t.c_f - 1.0);
            if (detune > kResonanceTol) {
                std::ostringstream os;
                os << "coil " << k << " is detuned: |w^2 L C - 1| = " << detune;
                throw InvalidParams(os.str());
            }
        }
    }
}

SystemModel build_system(const SystemParams& params) {
    params.validate();
    const int n = params.size();
    const double w2 = params.omega * params.omega;
    const double r0 = params.r0();

    SystemModel model;
    model.params = params;
    model.b_bar = (w2 / r0) * (params.m * params.m.transpose());
    for (int k = 0; k < n; ++k) model.b_bar(k, k) += params.tx[k].r_ohm;
    model.b_hat = -params.omega * params.m_tx;
    model.b = model.b_bar.cast<Complex>() + Complex(0, 1) * model.b_hat.cast<Complex>();

    // B_bar = R + (w^2/r0) m m^T is PSD by construction; verify numerically.
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(model.b_bar, Eigen::EigenvaluesOnly);
    const double floor = -1e-12 * model.b_bar.norm();
    if (es.eigenvalues().minCoeff() < floor)
        throw NumericalFailure("coupling matrix lost positive semidefiniteness");
    return model;
}

namespace {

void check_dim(const SystemModel& model, const VectorXcd& i) {
    if (i.size() != model.size())
        throw DimensionMismatch("current vector has length " + std::to_string(i.size()) +
                                ", expected " + std::to_string(model.size()));
}

} // namespace

Complex rx_current(const SystemModel& model, const VectorXcd& i) {
    check_dim(model, i);
    const Complex jw(0.0, model.params.omega);
    return jw / model.params.r0() * (model.params.m.cast<Complex>().dot(i));
}

double load_power(const SystemModel& model, const VectorXcd& i) {
    check_dim(model, i);
    const Complex coupled = model.params.m.cast<Complex>().transpose() * i;
    const double w = model.params.omega;
    const double r0 = model.params.r0();
    return w * w * model.params.rx.r_load_ohm / (2.0 * r0 * r0) * std::norm(coupled);
}

VectorXcd tx_voltages(const SystemModel& model, const VectorXcd& i) {
    check_dim(model, i);
    // v_n = b_n^H i for every n, i.e. v = B^H i; B is symmetric, not Hermitian.
    return model.b.adjoint() * i;
}

double total_source_power(const SystemModel& model, const VectorXcd& i) {
    check_dim(model, i);
    return 0.5 * std::real(i.dot(model.b_bar.cast<Complex>() * i));
}

VectorXd per_tx_power(const SystemModel& model, const VectorXcd& i) {
    const VectorXcd v = tx_voltages(model, i);
    VectorXd p(model.size());
    for (int n = 0; n < model.size(); ++n)
        p(n) = 0.5 * std::real(v(n) * std::conj(i(n)));
    return p;
}

std::vector<std::string> FeasibilityReport::binding_names() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (c.state == ConstraintState::Binding) out.push_back(c.name);
    return out;
}

namespace {

ConstraintCheck classify(std::string name, double value, double limit, double rel_margin) {
    ConstraintCheck c;
    c.name = std::move(name);
    c.value = value;
    c.limit = limit;
    c.rel_margin = rel_margin;
    if (rel_margin > kBindingTol)
        c.state = ConstraintState::Violated;
    else if (rel_margin >= -kBindingTol)
        c.state = ConstraintState::Binding;
    else
        c.state = ConstraintState::Slack;
    return c;
}

} // namespace

FeasibilityReport check_feasibility(const SystemModel& model, const VectorXcd& i,
                                    double beta0) {
    if (beta0 <= 0.0) throw InvalidParams("beta0 must be positive");
    check_dim(model, i);

    FeasibilityReport report;
    const double p0 = load_power(model, i);
    report.checks.push_back(classify("load_power", p0, beta0, (beta0 - p0) / beta0));

    const VectorXcd v = tx_voltages(model, i);
    for (int n = 0; n < model.size(); ++n) {
        if (const auto& vmax = model.params.tx[n].v_max_v) {
            const double mag = std::abs(v(n));
            report.checks.push_back(classify("v_" + std::to_string(n + 1), mag, *vmax,
                                             (mag - *vmax) / *vmax));
        }
        if (const auto& amax = model.params.tx[n].a_max_a) {
            const double mag = std::abs(i(n));
            report.checks.push_back(classify("i_" + std::to_string(n + 1), mag, *amax,
                                             (mag - *amax) / *amax));
        }
    }
    for (const auto& c : report.checks)
        report.max_violation = std::max(report.max_violation, c.rel_margin);
    report.max_violation = std::max(report.max_violation, 0.0);
    return report;
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::MaxIterations: return "max_iterations";
    }
    return "unknown";
}

CurrentSolution make_solution(const SystemModel& model, const VectorXcd& currents,
                              double beta0, SolveStatus status) {
    CurrentSolution sol;
    sol.currents = currents;
    sol.load_power = load_power(model, currents);
    sol.total_power = total_source_power(model, currents);
    sol.per_tx_power = per_tx_power(model, currents);
    sol.efficiency = sol.total_power > 0.0 ? sol.load_power / sol.total_power : 0.0;
    sol.binding = check_feasibility(model, currents, beta0);
    sol.status = status;
    return sol;
}

} // namespace magbeam
