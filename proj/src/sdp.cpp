#include "magbeam/sdp.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace magbeam {

namespace {

constexpr double kTightTol = 1e-6;        // extraction feasibility / objective match
constexpr double kRankDiagTol = 1e-4;     // rank_ratio beyond this is surfaced as error

MatrixXcd embed(const MatrixXcd& h) {
    const int n = static_cast<int>(h.rows());
    const MatrixXd p = h.real();
    const MatrixXd q = h.imag();
    MatrixXd e(2 * n, 2 * n);
    e << p, -q, q, p;
    return e.cast<Complex>();
}

MatrixXcd unembed(const MatrixXcd& z) {
    const int n = static_cast<int>(z.rows()) / 2;
    const MatrixXd zr = z.real();
    const MatrixXd p = 0.5 * (zr.topLeftCorner(n, n) + zr.bottomRightCorner(n, n));
    const MatrixXd q = 0.5 * (zr.bottomLeftCorner(n, n) - zr.topRightCorner(n, n));
    return p.cast<Complex>() + Complex(0, 1) * q.cast<Complex>();
}

double rel_violation(const TraceConstraint& c, const MatrixXcd& x) {
    const double val = (c.a.cwiseProduct(x.conjugate())).sum().real();
    const double scale = std::max(std::abs(c.bound), 1e-300);
    return c.lower ? (c.bound - val) / scale : (val - c.bound) / scale;
}

IpmResult run_ipm(const SdpProblem& problem, double tol, SdpFormulation form,
                  bool maximize_power) {
    MatrixXcd c = maximize_power ? MatrixXcd(-problem.power_matrix) : problem.objective;
    std::vector<TraceConstraint> cons;
    for (size_t i = maximize_power ? 1 : 0; i < problem.constraints.size(); ++i)
        cons.push_back(problem.constraints[i]);
    if (maximize_power && cons.empty())
        throw Unbounded("no peak limits bound the deliverable power");

    if (form == SdpFormulation::RealEmbedding) {
        c = embed(c);
        for (auto& tc : cons) {
            tc.a = embed(tc.a);
            tc.bound *= 2.0;
        }
    }

    IpmOptions opt;
    opt.tol = std::min(tol, 1e-11);
    opt.feas_tol = std::min(tol, 1e-11);
    IpmResult res = minimize_trace_sdp(c, cons, opt);

    if (form == SdpFormulation::RealEmbedding) {
        res.x = unembed(res.x);
        res.s = unembed(res.s);
        res.primal_obj *= 0.5;
        res.dual_obj *= 0.5;
    }
    if (maximize_power) {
        res.primal_obj = -res.primal_obj;
        res.dual_obj = -res.dual_obj;
    }
    return res;
}

MatrixXd embed_real(const MatrixXcd& h) {
    const int n = static_cast<int>(h.rows());
    MatrixXd e(2 * n, 2 * n);
    e << h.real(), -h.imag(), h.imag(), h.real();
    return e;
}

/// Newton refinement of the extracted rank-one point together with the
/// multipliers of the active constraints. An interior-point iterate leaves
/// the primal eigenvector misaligned with the dual null space by
/// O(sqrt(mu)); a few Newton steps on the active-set KKT system remove
/// that, after which the dual slack is rebuilt from the polished
/// multipliers. The global current phase is pinned by Im(m^H i) = 0.
void polish_solution(const SdpProblem& problem, SdrSolution& sdr) {
    const int n = static_cast<int>(problem.objective.rows());
    const int m = static_cast<int>(problem.constraints.size());

    // Active set: tight constraints or constraints carrying a multiplier.
    const double mult_scale =
        std::max({1e-300, sdr.lambda, sdr.rho.cwiseAbs().maxCoeff(),
                  sdr.mu.cwiseAbs().maxCoeff()});
    auto multiplier_of = [&](int j) -> double {
        if (j == 0) return sdr.lambda;
        const int nv = static_cast<int>(problem.voltage_tx.size());
        if (j - 1 < nv) return sdr.rho(problem.voltage_tx[j - 1]);
        return sdr.mu(problem.current_tx[j - 1 - nv]);
    };
    std::vector<int> active = {0};  // minimal power makes the load bound tight
    for (int j = 1; j < m; ++j) {
        const auto& c = problem.constraints[j];
        const double val = (sdr.currents.adjoint() * c.a * sdr.currents)(0).real();
        const bool tight = std::abs(val - c.bound) <= 1e-5 * std::max(c.bound, 1e-300);
        const bool carries = multiplier_of(j) > 1e-6 * mult_scale;
        if (tight || carries) active.push_back(j);
    }

    const MatrixXd ec = embed_real(problem.objective);
    std::vector<MatrixXd> ea(active.size());
    for (size_t j = 0; j < active.size(); ++j)
        ea[j] = embed_real(problem.constraints[active[j]].a);
    VectorXd gauge = VectorXd::Zero(2 * n);
    gauge.tail(n) = problem.m;

    for (int pass = 0; pass < 3; ++pass) {
        const int k = static_cast<int>(active.size());
        VectorXd z(2 * n);
        z.head(n) = sdr.currents.real();
        z.tail(n) = sdr.currents.imag();
        VectorXd mult(k);
        for (int j = 0; j < k; ++j) {
            const double sgn = problem.constraints[active[j]].lower ? -1.0 : 1.0;
            mult(j) = sgn * multiplier_of(active[j]);
        }

        const double cnorm = std::max(ec.norm(), 1e-300);
        bool converged = false;
        for (int it = 0; it < 20; ++it) {
            MatrixXd s_eff = ec;
            for (int j = 0; j < k; ++j) s_eff += mult(j) * ea[j];

            const int rows = 2 * n + 1 + k;
            const int cols = 2 * n + k;
            MatrixXd jac = MatrixXd::Zero(rows, cols);
            VectorXd rhs = VectorXd::Zero(rows);

            rhs.head(2 * n) = -(s_eff * z) / cnorm;
            jac.topLeftCorner(2 * n, 2 * n) = s_eff / cnorm;
            for (int j = 0; j < k; ++j)
                jac.block(0, 2 * n + j, 2 * n, 1) = (ea[j] * z) / cnorm;
            jac.row(2 * n).head(2 * n) = gauge.transpose();
            rhs(2 * n) = -gauge.dot(z);
            for (int j = 0; j < k; ++j) {
                const double b = problem.constraints[active[j]].bound;
                const double scale = std::max(std::abs(b), 1e-300);
                const VectorXd az = ea[j] * z;
                jac.row(2 * n + 1 + j).head(2 * n) = 2.0 * az.transpose() / scale;
                rhs(2 * n + 1 + j) = -(z.dot(az) - b) / scale;
            }

            if (rhs.norm() <= 1e-13 * (1.0 + z.norm())) {
                converged = true;
                break;
            }
            const VectorXd step = jac.colPivHouseholderQr().solve(rhs);
            z += step.head(2 * n);
            mult += step.tail(k);
            if (step.norm() <= 1e-15 * (1.0 + z.norm())) {
                converged = true;
                break;
            }
        }
        if (!converged) return;  // keep the interior-point iterate

        // Drop constraints whose polished multiplier went negative and retry.
        std::vector<int> keep;
        bool dropped = false;
        for (int j = 0; j < k; ++j) {
            const double sgn = problem.constraints[active[j]].lower ? -1.0 : 1.0;
            if (active[j] != 0 && sgn * mult(j) < -1e-9 * mult_scale) {
                dropped = true;
            } else {
                keep.push_back(active[j]);
            }
        }
        if (dropped && pass < 2) {
            active = keep;
            ea.resize(active.size());
            for (size_t j = 0; j < active.size(); ++j)
                ea[j] = embed_real(problem.constraints[active[j]].a);
            continue;
        }

        // Accept: write back currents, multipliers, and the rebuilt slack.
        VectorXcd i(n);
        for (int r = 0; r < n; ++r) i(r) = Complex(z(r), z(n + r));
        const Complex proj = problem.m.cast<Complex>().dot(i);
        if (std::abs(proj) > 0.0 && proj.real() < 0.0) i = -i;
        sdr.currents = i;
        sdr.objective = (i.adjoint() * problem.objective * i)(0).real();

        sdr.lambda = 0.0;
        sdr.rho.setZero();
        sdr.mu.setZero();
        const int nv = static_cast<int>(problem.voltage_tx.size());
        for (int j = 0; j < static_cast<int>(active.size()); ++j) {
            const double sgn = problem.constraints[active[j]].lower ? -1.0 : 1.0;
            const double value = std::max(sgn * mult(j), 0.0);
            if (active[j] == 0)
                sdr.lambda = value;
            else if (active[j] - 1 < nv)
                sdr.rho(problem.voltage_tx[active[j] - 1]) = value;
            else
                sdr.mu(problem.current_tx[active[j] - 1 - nv]) = value;
        }
        MatrixXcd s = problem.objective - sdr.lambda * problem.power_matrix;
        for (int j = 0; j < nv; ++j)
            s += sdr.rho(problem.voltage_tx[j]) * problem.constraints[1 + j].a;
        for (size_t j = 0; j < problem.current_tx.size(); ++j)
            s += sdr.mu(problem.current_tx[j]) *
                 problem.constraints[1 + nv + j].a;
        sdr.s = s;
        return;
    }
}

/// Largest achievable Re<m m^H, X> under the peak limits alone. Used as an
/// exact feasibility certificate for the load-power constraint.
double max_power_trace(const SdpProblem& problem, double tol, SdpFormulation form) {
    const IpmResult res = run_ipm(problem, tol, form, /*maximize_power=*/true);
    if (res.status != IpmStatus::Optimal)
        throw NumericalFailure("deliverable-power bound SDP did not converge");
    return res.primal_obj;
}

} // namespace

SdpProblem formulate(const SystemModel& model, double beta0) {
    if (beta0 <= 0.0) throw InvalidParams("beta0 must be positive");
    if (model.params.m.norm() == 0.0)
        throw ZeroCoupling("all TX-RX mutual inductances are zero");
    const int n = model.size();
    const auto& p = model.params;
    const double r0 = p.r0();

    SdpProblem sp;
    sp.beta0 = beta0;
    sp.objective = 0.5 * model.b_bar.cast<Complex>();
    sp.m = p.m;
    const VectorXcd mc = p.m.cast<Complex>();
    sp.power_matrix = mc * mc.adjoint();
    sp.power_threshold =
        2.0 * r0 * r0 * beta0 / (p.omega * p.omega * p.rx.r_load_ohm);
    sp.constraints.push_back({sp.power_matrix, sp.power_threshold, /*lower=*/true});

    sp.fully_limited = true;
    for (int k = 0; k < n; ++k) {
        if (!p.tx[k].v_max_v && !p.tx[k].a_max_a) sp.fully_limited = false;
        if (const auto& vmax = p.tx[k].v_max_v) {
            const VectorXcd bn = model.b.col(k);
            sp.constraints.push_back({bn * bn.adjoint(), (*vmax) * (*vmax), false});
            sp.voltage_tx.push_back(k);
        }
    }
    for (int k = 0; k < n; ++k) {
        if (const auto& amax = p.tx[k].a_max_a) {
            MatrixXcd q = MatrixXcd::Zero(n, n);
            q(k, k) = 1.0;
            sp.constraints.push_back({q, (*amax) * (*amax), false});
            sp.current_tx.push_back(k);
        }
    }
    return sp;
}

SdrSolution solve_sdr(const SdpProblem& problem, double tol, SdpFormulation form) {
    const int n = static_cast<int>(problem.objective.rows());
    SdrSolution sol;
    sol.rho = VectorXd::Zero(n);
    sol.mu = VectorXd::Zero(n);

    // When every TX carries a limit the deliverable power is bounded; check
    // the load-power target against that bound before solving.
    if (problem.fully_limited && problem.constraints.size() > 1) {
        const double pmax = max_power_trace(problem, tol, form);
        if (problem.power_threshold > pmax * (1.0 + 1e-9)) {
            sol.status = IpmStatus::Infeasible;
            sol.x = MatrixXcd::Zero(n, n);
            sol.s = MatrixXcd::Zero(n, n);
            return sol;
        }
    }

    const IpmResult res = run_ipm(problem, tol, form, /*maximize_power=*/false);
    sol.x = res.x;
    sol.s = res.s;
    sol.objective = res.primal_obj;
    sol.gap = res.gap;
    sol.status = res.status;
    if (res.status == IpmStatus::Infeasible || res.multipliers.size() == 0) return sol;

    sol.lambda = res.multipliers(0);
    int idx = 1;
    for (int k : problem.voltage_tx) sol.rho(k) = res.multipliers(idx++);
    for (int k : problem.current_tx) sol.mu(k) = res.multipliers(idx++);
    return sol;
}

VectorXcd extract_rank_one(const SdpProblem& problem, SdrSolution& sdr) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sdr.x);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigendecomposition of X failed");
    const int n = static_cast<int>(sdr.x.rows());
    const double l1 = es.eigenvalues()(n - 1);
    const double l2 = n > 1 ? std::max(es.eigenvalues()(n - 2), 0.0) : 0.0;
    if (l1 <= 0.0) throw NumericalFailure("relaxation optimum has no positive eigenvalue");
    sdr.rank_ratio = l2 / l1;

    VectorXcd i = std::sqrt(l1) * es.eigenvectors().col(n - 1);
    // Global phase so that m^H i is real and nonnegative.
    const Complex proj = problem.m.cast<Complex>().dot(i);
    if (std::abs(proj) > 0.0) i *= std::conj(proj) / std::abs(proj);

    if (sdr.rank_ratio > kRankDiagTol)
        throw RankDeficiencyUnexpected("relaxation optimum is not rank-one: ratio " +
                                       std::to_string(sdr.rank_ratio));
    sdr.currents = i;
    polish_solution(problem, sdr);
    return sdr.currents;
}

double KktReport::max_residual() const {
    return std::max({stationarity, complementarity, primal_feasibility, dual_feasibility});
}

KktReport verify_kkt(const SystemModel& model, double beta0, const SdrSolution& sdr) {
    const SdpProblem problem = formulate(model, beta0);
    const int n = model.size();

    MatrixXcd stat = problem.objective - sdr.lambda * problem.power_matrix - sdr.s;
    MatrixXcd shifted = problem.objective;
    int idx = 1;
    for (int k : problem.voltage_tx) {
        stat += sdr.rho(k) * problem.constraints[idx].a;
        shifted += sdr.rho(k) * problem.constraints[idx].a;
        ++idx;
    }
    for (int k : problem.current_tx) {
        stat += sdr.mu(k) * problem.constraints[idx].a;
        shifted += sdr.mu(k) * problem.constraints[idx].a;
        ++idx;
    }

    KktReport rep;
    const double cnorm = problem.objective.norm();
    rep.stationarity = stat.norm() / cnorm;

    // Check the certificate at the rank-one optimum when it has been
    // extracted: its dominant eigenvector is accurate to the duality gap,
    // whereas the interior iterate carries O(sqrt(mu)) misalignment in its
    // vanishing eigenspace.
    const MatrixXcd x_opt = sdr.currents.size() > 0
                                ? MatrixXcd(sdr.currents * sdr.currents.adjoint())
                                : sdr.x;
    rep.complementarity =
        (sdr.s * x_opt).norm() / std::max(sdr.s.norm() * x_opt.norm(), 1e-300);

    double pviol = 0.0;
    for (const auto& c : problem.constraints)
        pviol = std::max(pviol, rel_violation(c, x_opt));
    Eigen::SelfAdjointEigenSolver<MatrixXcd> ex(x_opt, Eigen::EigenvaluesOnly);
    pviol = std::max(pviol, -ex.eigenvalues()(0) / std::max(x_opt.norm(), 1e-300));
    rep.primal_feasibility = std::max(pviol, 0.0);

    const double dual_scale =
        std::max({1.0, sdr.lambda, sdr.rho.maxCoeff(), sdr.mu.maxCoeff()});
    double dviol =
        -std::min({sdr.lambda, sdr.rho.minCoeff(), sdr.mu.minCoeff()}) / dual_scale;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sdr.s, Eigen::EigenvaluesOnly);
    dviol = std::max(dviol, -es.eigenvalues()(0) / std::max(sdr.s.norm(), 1e-300));
    rep.dual_feasibility = std::max(dviol, 0.0);

    Eigen::SelfAdjointEigenSolver<MatrixXcd> ef(shifted, Eigen::EigenvaluesOnly);
    rep.shifted_min_eig = ef.eigenvalues()(0) / cnorm;
    rep.rank_ratio = sdr.rank_ratio;
    (void)n;
    return rep;
}

CurrentSolution solve_p1(const SystemModel& model, double beta0, double tol,
                         SdpFormulation form) {
    const SdpProblem problem = formulate(model, beta0);
    SdrSolution sdr = solve_sdr(problem, tol, form);
    if (sdr.status == IpmStatus::Infeasible) {
        CurrentSolution sol;
        sol.currents = VectorXcd::Zero(model.size());
        sol.per_tx_power = VectorXd::Zero(model.size());
        sol.status = SolveStatus::Infeasible;
        return sol;
    }
    if (sdr.status == IpmStatus::MaxIterations) {
        CurrentSolution sol;
        sol.currents = VectorXcd::Zero(model.size());
        sol.per_tx_power = VectorXd::Zero(model.size());
        sol.status = SolveStatus::MaxIterations;
        return sol;
    }

    const VectorXcd i = extract_rank_one(problem, sdr);
    CurrentSolution sol = make_solution(model, i, beta0, SolveStatus::Optimal);
    const double obj_err =
        std::abs(sol.total_power - sdr.objective) / std::max(sdr.objective, 1e-300);
    if (!sol.binding.feasible(kTightTol) || obj_err > kTightTol)
        sol.status = SolveStatus::MaxIterations;
    return sol;
}

std::pair<double, CurrentSolution> max_deliverable_power(const SystemModel& model,
                                                         double tol) {
    bool any_limit = false;
    for (const auto& t : model.params.tx)
        if (t.v_max_v || t.a_max_a) any_limit = true;
    if (!any_limit) throw Unbounded("no TX carries a finite peak limit");

    const auto& p = model.params;
    const double r0 = p.r0();
    const double power_coeff = p.omega * p.omega * p.rx.r_load_ohm / (2.0 * r0 * r0);

    auto feasible = [&](double beta) {
        return solve_p1(model, beta, tol).status == SolveStatus::Optimal;
    };

    double lo, hi;
    const SdpProblem probe = formulate(model, 1.0);
    if (probe.fully_limited && probe.constraints.size() > 1) {
        const double pmax = power_coeff * max_power_trace(probe, tol,
                                                          SdpFormulation::Hermitian);
        lo = 0.9 * pmax;
        hi = pmax * (1.0 + 1e-3);
        int guard = 0;
        while (!feasible(lo)) {
            lo *= 0.5;
            if (++guard > 60) throw NumericalFailure("no feasible load power found");
        }
    } else {
        lo = 1.0;
        int guard = 0;
        while (!feasible(lo)) {
            lo *= 0.5;
            if (++guard > 120) throw NumericalFailure("no feasible load power found");
        }
        hi = 2.0 * lo;
        guard = 0;
        while (feasible(hi)) {
            lo = hi;
            hi *= 2.0;
            if (++guard > 60)
                throw Unbounded("deliverable power appears unbounded under the given limits");
        }
    }

    while ((hi - lo) / hi > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            lo = mid;
        else
            hi = mid;
    }
    return {lo, solve_p1(model, lo, tol)};
}

} // namespace magbeam
