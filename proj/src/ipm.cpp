#include "magbeam/ipm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <limits>

namespace magbeam {

namespace {

double inner(const MatrixXcd& a, const MatrixXcd& b) {
    return (a.cwiseProduct(b.conjugate())).sum().real();
}

MatrixXcd hermitize(const MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

/// Largest step alpha so that x + alpha*dx stays PSD, via the generalized
/// eigenvalue bound lambda_min(L^-1 dx L^-H).
double max_psd_step(const MatrixXcd& x, const MatrixXcd& dx) {
    Eigen::LLT<MatrixXcd> llt(x);
    if (llt.info() != Eigen::Success) return 0.0;
    const MatrixXcd l = llt.matrixL();
    const MatrixXcd m = l.triangularView<Eigen::Lower>().solve(
        l.triangularView<Eigen::Lower>().solve(dx).adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitize(m), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

double max_pos_step(const VectorXd& v, const VectorXd& dv) {
    double a = std::numeric_limits<double>::infinity();
    for (int i = 0; i < v.size(); ++i)
        if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
    return a;
}

struct Scaled {
    MatrixXcd c;
    std::vector<MatrixXcd> a;
    VectorXd b;
    VectorXd sigma;       // +1 for <=, -1 for >=
    VectorXd a_norm;      // original Frobenius norms
    double c_norm = 1.0;
    double b_scale = 1.0;
};

Scaled scale_problem(const MatrixXcd& c, const std::vector<TraceConstraint>& cons) {
    Scaled s;
    const int m = static_cast<int>(cons.size());
    const double cn = c.norm();
    s.c_norm = cn > 0.0 ? cn : 1.0;
    s.c = c / s.c_norm;
    s.a.resize(m);
    s.b.resize(m);
    s.sigma.resize(m);
    s.a_norm.resize(m);
    for (int i = 0; i < m; ++i) {
        const double f = cons[i].a.norm();
        if (!(f > 0.0)) throw InvalidParams("constraint matrix is zero");
        s.a_norm(i) = f;
        s.a[i] = hermitize(cons[i].a) / f;
        s.b(i) = cons[i].bound / f;
        s.sigma(i) = cons[i].lower ? -1.0 : 1.0;
    }
    const double bn = s.b.cwiseAbs().maxCoeff();
    s.b_scale = bn > 0.0 ? bn : 1.0;
    s.b /= s.b_scale;
    return s;
}

} // namespace

IpmResult minimize_trace_sdp(const MatrixXcd& c, const std::vector<TraceConstraint>& cons,
                             const IpmOptions& opt) {
    const int n = static_cast<int>(c.rows());
    const int m = static_cast<int>(cons.size());
    if (m == 0) throw InvalidParams("at least one constraint is required");
    const Scaled sp = scale_problem(c, cons);
    const double nu = n + m;

    // Infeasible start on the central ray.
    MatrixXcd x = 10.0 * MatrixXcd::Identity(n, n);
    MatrixXcd s = std::max(10.0, sp.c.norm()) * MatrixXcd::Identity(n, n);
    VectorXd t = VectorXd::Constant(m, 10.0);
    VectorXd w = VectorXd::Constant(m, 10.0);
    VectorXd y = VectorXd::Zero(m);

    auto apply_a = [&](const MatrixXcd& z) {
        VectorXd out(m);
        for (int i = 0; i < m; ++i) out(i) = inner(sp.a[i], z);
        return out;
    };
    auto adjoint_a = [&](const VectorXd& v) {
        MatrixXcd out = MatrixXcd::Zero(n, n);
        for (int i = 0; i < m; ++i) out += v(i) * sp.a[i];
        return out;
    };

    IpmResult best;
    double best_score = std::numeric_limits<double>::infinity();
    int stall = 0;

    auto record = [&](int iter) {
        const double pobj = inner(sp.c, x);
        const double dobj = sp.b.dot(y);
        const VectorXd rp = sp.b - apply_a(x) - sp.sigma.cwiseProduct(t);
        const MatrixXcd rd = sp.c - adjoint_a(y) - s;
        const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        const double pres = rp.norm() / (1.0 + sp.b.norm());
        const double dres = rd.norm() / (1.0 + sp.c.norm());
        const double score = std::max({gap, pres, dres});
        if (score < best_score) {
            best_score = score;
            best.x = x;
            best.s = s;
            best.multipliers = -(sp.sigma.cwiseProduct(y));
            best.primal_obj = pobj;
            best.dual_obj = dobj;
            best.gap = gap;
            best.primal_residual = pres;
            best.dual_residual = dres;
            best.iterations = iter;
            stall = 0;
        } else {
            ++stall;
        }
        return score;
    };

    bool diverged = false;
    for (int iter = 0; iter <= opt.max_iters; ++iter) {
        const double score = record(iter);
        if (best.gap <= opt.tol && best.primal_residual <= opt.feas_tol &&
            best.dual_residual <= opt.feas_tol) {
            best.status = IpmStatus::Optimal;
            break;
        }
        if (stall > 12 || iter == opt.max_iters) break;
        // Dual ray heuristic: unbounded dual objective with vanishing dual
        // residual certifies primal infeasibility.
        if (sp.b.dot(y) > 1e9 && best.dual_residual < 1e-6) {
            diverged = true;
            break;
        }
        (void)score;

        const double mu_check = (inner(x, s) + t.dot(w)) / nu;
        if (!(mu_check > 0.0)) break;

        const VectorXd rp = sp.b - apply_a(x) - sp.sigma.cwiseProduct(t);
        const MatrixXcd rd = sp.c - adjoint_a(y) - s;
        const VectorXd rw = -(sp.sigma.cwiseProduct(y)) - w;
        const double mu = (inner(x, s) + t.dot(w)) / nu;

        Eigen::LLT<MatrixXcd> slt(s);
        if (slt.info() != Eigen::Success) break;
        const MatrixXcd sinv = slt.solve(MatrixXcd::Identity(n, n));

        // Schur complement of the HKM direction (nonsymmetric in general).
        std::vector<MatrixXcd> xas(m);
        for (int j = 0; j < m; ++j) xas[j] = x * sp.a[j] * sinv;
        MatrixXd schur(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) schur(i, j) = inner(sp.a[i], xas[j]);
        for (int i = 0; i < m; ++i) schur(i, i) += t(i) / w(i);
        Eigen::PartialPivLU<MatrixXd> lu(schur);

        const MatrixXcd xrs = x * rd * sinv;

        auto solve_direction = [&](double mu_hat, const MatrixXcd& corr_x,
                                   const VectorXd& corr_t, VectorXd& dy, MatrixXcd& dx,
                                   MatrixXcd& ds, VectorXd& dt, VectorXd& dw) {
            const MatrixXcd g = mu_hat * sinv - x - corr_x * sinv;
            VectorXd rhs(m);
            for (int i = 0; i < m; ++i) {
                const double slack_term =
                    sp.sigma(i) * ((mu_hat - t(i) * w(i) - corr_t(i)) / w(i) -
                                   t(i) / w(i) * rw(i));
                rhs(i) = rp(i) - inner(sp.a[i], g - xrs) - slack_term;
            }
            dy = lu.solve(rhs);
            ds = rd - adjoint_a(dy);
            dx = hermitize(g - xrs + x * adjoint_a(dy) * sinv);
            for (int i = 0; i < m; ++i) {
                dw(i) = rw(i) - sp.sigma(i) * dy(i);
                dt(i) = (mu_hat - t(i) * w(i) - corr_t(i)) / w(i) - t(i) / w(i) * dw(i);
            }
        };

        VectorXd dy(m), dt(m), dw(m);
        MatrixXcd dx(n, n), ds(n, n);

        // Predictor (affine scaling).
        solve_direction(0.0, MatrixXcd::Zero(n, n), VectorXd::Zero(m), dy, dx, ds, dt, dw);
        const double ap_aff =
            std::min(1.0, std::min(max_psd_step(x, dx), max_pos_step(t, dt)));
        const double ad_aff =
            std::min(1.0, std::min(max_psd_step(s, ds), max_pos_step(w, dw)));
        const double mu_aff = (inner(x + ap_aff * dx, s + ad_aff * ds) +
                               (t + ap_aff * dt).dot(w + ad_aff * dw)) /
                              nu;
        double sigma_c = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
        sigma_c = std::min(1.0, std::max(sigma_c, 1e-8));

        // Corrector.
        const MatrixXcd corr_x = dx * ds;
        const VectorXd corr_t = dt.cwiseProduct(dw);
        solve_direction(sigma_c * mu, corr_x, corr_t, dy, dx, ds, dt, dw);

        const double gamma = 0.98;
        const double ap =
            std::min(1.0, gamma * std::min(max_psd_step(x, dx), max_pos_step(t, dt)));
        const double ad =
            std::min(1.0, gamma * std::min(max_psd_step(s, ds), max_pos_step(w, dw)));
        if (!(ap > 0.0) || !(ad > 0.0)) break;

        x = hermitize(x + ap * dx);
        t += ap * dt;
        y += ad * dy;
        s = hermitize(s + ad * ds);
        w += ad * dw;
    }

    if (best.status != IpmStatus::Optimal) {
        if (diverged) {
            best.status = IpmStatus::Infeasible;
        } else if (best.gap <= 1e-7 && best.primal_residual <= 1e-8 &&
                   best.dual_residual <= 1e-8) {
            best.status = IpmStatus::Optimal;  // stalled just past the target
        } else {
            best.status = IpmStatus::MaxIterations;
        }
    }

    // Undo scaling.
    best.x *= sp.b_scale;
    best.s *= sp.c_norm;
    best.primal_obj *= sp.c_norm * sp.b_scale;
    best.dual_obj *= sp.c_norm * sp.b_scale;
    for (int i = 0; i < m; ++i) best.multipliers(i) *= sp.c_norm / sp.a_norm(i);
    return best;
}

} // namespace magbeam
