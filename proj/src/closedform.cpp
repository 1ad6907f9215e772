#include "magbeam/closedform.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace magbeam {

namespace {

constexpr int kMaxBisect = 200;

MatrixXd dual_matrix(const SystemModel& model, double v) {
    const auto& p = model.params;
    const double r0 = p.r0();
    const double coeff = p.omega * p.omega * (r0 - v * p.rx.r_load_ohm) / (r0 * r0);
    MatrixXd t = coeff * (p.m * p.m.transpose());
    for (int n = 0; n < model.size(); ++n) t(n, n) += p.tx[n].r_ohm;
    return t;
}

double min_eig(const MatrixXd& t, VectorXd* vec = nullptr) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(t);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigendecomposition failed");
    if (vec) *vec = es.eigenvectors().col(0);
    return es.eigenvalues()(0);
}

ClosedFormSolution finish(const SystemModel& model, double beta0, double v_star,
                          const VectorXd& u1) {
    const auto& p = model.params;
    const double r0 = p.r0();
    const double coupling = p.m.dot(u1);
    if (std::abs(coupling) < 1e-300)
        throw NumericalFailure("null eigenvector is orthogonal to the coupling vector");

    // Load-power constraint holds with equality:
    //   (w^2 r_l0 / 2 r0^2) alpha^2 (m^T u1)^2 = beta0
    const double c_load = p.omega * p.omega * p.rx.r_load_ohm / (2.0 * r0 * r0);
    const double alpha = std::sqrt(beta0 / c_load) / std::abs(coupling);

    ClosedFormSolution cf;
    cf.eigvec = coupling >= 0.0 ? u1 : VectorXd(-u1);
    cf.currents = alpha * cf.eigvec;
    cf.dual_v = v_star;
    cf.alpha = alpha;
    cf.solution = make_solution(model, cf.currents.cast<Complex>(), beta0,
                                SolveStatus::Optimal);
    cf.duality_gap =
        std::abs(cf.solution.total_power - beta0 * v_star) / cf.solution.total_power;
    return cf;
}

void check_preconditions(const SystemModel& model, double beta0) {
    if (beta0 <= 0.0) throw InvalidParams("beta0 must be positive");
    if (model.params.m.norm() == 0.0)
        throw ZeroCoupling("all TX-RX mutual inductances are zero");
}

} // namespace

ClosedFormSolution solve_unconstrained(const SystemModel& model, double beta0) {
    check_preconditions(model, beta0);

    // lambda_min(T(v)) is monotone nonincreasing in v: T(0) = B_bar > 0, and
    // for large v the rank-one term drives the smallest eigenvalue negative.
    double v_lo = 0.0;
    double v_hi = 1.0;
    double lo_eig = min_eig(dual_matrix(model, v_lo));
    if (lo_eig <= 0.0) throw NumericalFailure("bisection bracket invalid at v = 0");
    int doubles = 0;
    while (min_eig(dual_matrix(model, v_hi)) > 0.0) {
        v_hi *= 2.0;
        if (++doubles > 200) throw NumericalFailure("failed to bracket the dual variable");
    }

    double r_norm = 0.0;
    for (const auto& t : model.params.tx) r_norm = std::max(r_norm, t.r_ohm);
    const double eig_tol = 1e-10 * r_norm;

    VectorXd u1;
    double v_star = v_hi;
    for (int it = 0; it < kMaxBisect; ++it) {
        const double mid = 0.5 * (v_lo + v_hi);
        const double e = min_eig(dual_matrix(model, mid), &u1);
        if (e > 0.0)
            v_lo = mid;
        else
            v_hi = mid;
        v_star = mid;
        if (std::abs(e) <= eig_tol) break;
    }
    min_eig(dual_matrix(model, v_star), &u1);
    return finish(model, beta0, v_star, u1);
}

ClosedFormSolution solve_identical_r(const SystemModel& model, double beta0) {
    check_preconditions(model, beta0);
    const auto& p = model.params;
    const double r = p.tx[0].r_ohm;
    for (const auto& t : p.tx)
        if (std::abs(t.r_ohm - r) > 1e-12 * r)
            throw NotIdenticalResistances("TX resistances differ");

    // Null eigenvector is m itself; the dual value follows from the
    // rank-one eigenvalue r + w^2 (r0 - v r_l0) ||m||^2 / r0^2 = 0.
    const double r0 = p.r0();
    const double m2 = p.m.squaredNorm();
    const double v_star = 1.0 + r * r0 * r0 / (p.rx.r_load_ohm * p.omega * p.omega * m2) +
                          p.rx.r_parasitic_ohm / p.rx.r_load_ohm;
    return finish(model, beta0, v_star, p.m.normalized());
}

} // namespace magbeam
