#include "magbeam/baseline.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace magbeam {

namespace {

double equal_current_scale(const SystemModel& model, double beta0) {
    const auto& p = model.params;
    const double coupled = p.m.sum();
    if (std::abs(coupled) <= 1e-12 * p.m.cwiseAbs().maxCoeff())
        throw ZeroCoupling("TX-RX couplings cancel under equal currents");
    const double r0 = p.r0();
    const double c_load = p.omega * p.omega * p.rx.r_load_ohm / (2.0 * r0 * r0);
    return std::sqrt(beta0 / c_load) / std::abs(coupled);
}

} // namespace

CurrentSolution equal_current_min_power(const SystemModel& model, double beta0) {
    if (beta0 <= 0.0) throw InvalidParams("beta0 must be positive");
    const double alpha = equal_current_scale(model, beta0);
    const VectorXcd i = VectorXcd::Constant(model.size(), Complex(alpha, 0.0));
    CurrentSolution sol = make_solution(model, i, beta0, SolveStatus::Optimal);
    if (!sol.binding.feasible(1e-7)) sol.status = SolveStatus::Infeasible;
    return sol;
}

std::pair<double, CurrentSolution> equal_current_max_power(const SystemModel& model) {
    const auto& p = model.params;
    const VectorXcd unit = VectorXcd::Constant(model.size(), Complex(1.0, 0.0));
    const VectorXcd v_unit = tx_voltages(model, unit);

    double alpha_max = std::numeric_limits<double>::infinity();
    for (int n = 0; n < model.size(); ++n) {
        if (p.tx[n].a_max_a) alpha_max = std::min(alpha_max, *p.tx[n].a_max_a);
        if (p.tx[n].v_max_v)
            alpha_max = std::min(alpha_max, *p.tx[n].v_max_v / std::abs(v_unit(n)));
    }
    if (!std::isfinite(alpha_max))
        throw Unbounded("no TX carries a finite peak limit");

    const VectorXcd i = alpha_max * unit;
    const double beta_max = load_power(model, i);
    if (beta_max <= 0.0)
        throw ZeroCoupling("TX-RX couplings cancel under equal currents");
    return {beta_max, make_solution(model, i, beta_max, SolveStatus::Optimal)};
}

namespace {

/// Smooth augmented-Lagrangian objective over real coordinates z = (x; y)
/// for i = x + jy. Peak-current limits are kept out of it and enforced by
/// projection onto the per-TX disks.
struct AugLag {
    const SystemModel& model;
    double beta0;
    MatrixXd b_bar;
    std::vector<int> limited_v;   // TX indices with a voltage limit
    std::vector<VectorXd> v_re;   // |v_n|^2 = (v_re.z)^2 + (v_im.z)^2
    std::vector<VectorXd> v_im;
    std::vector<double> v_lim2;
    VectorXd m_re;                // load power = c_load ((m_re.z)^2 + (m_im.z)^2)
    VectorXd m_im;
    double c_load;

    VectorXd lambda;  // multipliers: [load, voltage...]
    double rho = 10.0;

    explicit AugLag(const SystemModel& mdl, double b0) : model(mdl), beta0(b0) {
        const int n = mdl.size();
        b_bar = mdl.b_bar;
        const auto& p = mdl.params;
        const double r0 = p.r0();
        c_load = p.omega * p.omega * p.rx.r_load_ohm / (2.0 * r0 * r0);
        m_re = VectorXd::Zero(2 * n);
        m_im = VectorXd::Zero(2 * n);
        m_re.head(n) = p.m;
        m_im.tail(n) = p.m;
        for (int k = 0; k < n; ++k) {
            if (!p.tx[k].v_max_v) continue;
            limited_v.push_back(k);
            VectorXd re = VectorXd::Zero(2 * n), im = VectorXd::Zero(2 * n);
            re.head(n) = mdl.b_bar.col(k);
            re.tail(n) = mdl.b_hat.col(k);
            im.head(n) = -mdl.b_hat.col(k);
            im.tail(n) = mdl.b_bar.col(k);
            v_re.push_back(re);
            v_im.push_back(im);
            v_lim2.push_back((*p.tx[k].v_max_v) * (*p.tx[k].v_max_v));
        }
        lambda = VectorXd::Zero(1 + static_cast<int>(limited_v.size()));
    }

    double objective(const VectorXd& z) const {
        const int n = model.size();
        return 0.5 * (z.head(n).dot(b_bar * z.head(n)) + z.tail(n).dot(b_bar * z.tail(n)));
    }

    VectorXd constraints(const VectorXd& z) const {
        VectorXd g(lambda.size());
        const double re = m_re.dot(z), im = m_im.dot(z);
        g(0) = 1.0 - c_load * (re * re + im * im) / beta0;
        for (size_t c = 0; c < limited_v.size(); ++c) {
            const double vr = v_re[c].dot(z), vi = v_im[c].dot(z);
            g(1 + c) = (vr * vr + vi * vi) / v_lim2[c] - 1.0;
        }
        return g;
    }

    double value(const VectorXd& z) const {
        double val = objective(z);
        const VectorXd g = constraints(z);
        for (int c = 0; c < g.size(); ++c) {
            const double t = std::max(0.0, lambda(c) + rho * g(c));
            val += (t * t - lambda(c) * lambda(c)) / (2.0 * rho);
        }
        return val;
    }

    VectorXd gradient(const VectorXd& z) const {
        const int n = model.size();
        VectorXd grad(2 * n);
        grad.head(n) = b_bar * z.head(n);
        grad.tail(n) = b_bar * z.tail(n);

        const VectorXd g = constraints(z);
        {
            const double t = std::max(0.0, lambda(0) + rho * g(0));
            const double re = m_re.dot(z), im = m_im.dot(z);
            grad += t * (-2.0 * c_load / beta0) * (re * m_re + im * m_im);
        }
        for (size_t c = 0; c < limited_v.size(); ++c) {
            const double t = std::max(0.0, lambda(1 + c) + rho * g(1 + c));
            if (t == 0.0) continue;
            const double vr = v_re[c].dot(z), vi = v_im[c].dot(z);
            grad += t * (2.0 / v_lim2[c]) * (vr * v_re[c] + vi * v_im[c]);
        }
        return grad;
    }

    void project(VectorXd& z) const {
        const int n = model.size();
        for (int k = 0; k < n; ++k) {
            const auto& amax = model.params.tx[k].a_max_a;
            if (!amax) continue;
            const double mag = std::hypot(z(k), z(n + k));
            if (mag > *amax) {
                z(k) *= *amax / mag;
                z(n + k) *= *amax / mag;
            }
        }
    }
};

/// Newton refinement of a candidate on its active constraint set. The
/// projected-gradient phase settles the active set but approaches the
/// stationary point only linearly; a few Newton steps on the
/// equality-constrained KKT system (with the global phase pinned by
/// Im(m^H i) = 0) close the remaining gap. The refined point is accepted
/// only when it stays feasible and does not increase the objective.
void polish_candidate(const SystemModel& model, const AugLag& al, double beta0,
                      VectorXd& z) {
    const int n = model.size();
    const auto& p = model.params;

    struct Quad {
        MatrixXd g;
        double bound;
    };
    std::vector<Quad> active;
    {
        // Load power is active at any local minimum: otherwise shrinking z
        // lowers the objective without breaking the <= limits.
        MatrixXd gp = al.c_load * (al.m_re * al.m_re.transpose() +
                                   al.m_im * al.m_im.transpose());
        active.push_back({std::move(gp), beta0});
    }
    // The projected-gradient phase leaves binding constraints slack by up
    // to ~1e-4 relative; the looser threshold hands them to the Newton
    // phase, which drops any that turn out inactive.
    constexpr double kActiveTol = 1e-3;
    for (size_t c = 0; c < al.limited_v.size(); ++c) {
        const double vr = al.v_re[c].dot(z), vi = al.v_im[c].dot(z);
        if ((vr * vr + vi * vi) / al.v_lim2[c] - 1.0 >= -kActiveTol) {
            MatrixXd g = al.v_re[c] * al.v_re[c].transpose() +
                         al.v_im[c] * al.v_im[c].transpose();
            active.push_back({std::move(g), al.v_lim2[c]});
        }
    }
    for (int k = 0; k < n; ++k) {
        if (!p.tx[k].a_max_a) continue;
        const double a2 = (*p.tx[k].a_max_a) * (*p.tx[k].a_max_a);
        if ((z(k) * z(k) + z(n + k) * z(n + k)) / a2 - 1.0 >= -kActiveTol) {
            MatrixXd g = MatrixXd::Zero(2 * n, 2 * n);
            g(k, k) = 1.0;
            g(n + k, n + k) = 1.0;
            active.push_back({std::move(g), a2});
        }
    }

    MatrixXd h = MatrixXd::Zero(2 * n, 2 * n);
    h.topLeftCorner(n, n) = al.b_bar;
    h.bottomRightCorner(n, n) = al.b_bar;
    const double hnorm = std::max(h.norm(), 1e-300);

    for (int pass = 0; pass < 4; ++pass) {
        const int k = static_cast<int>(active.size());
        VectorXd zc = z;
        VectorXd mult = VectorXd::Zero(k);
        // Sign convention: first multiplier belongs to the >= constraint.
        bool converged = false;
        for (int it = 0; it < 20; ++it) {
            MatrixXd s_eff = h;
            s_eff -= 2.0 * mult(0) * active[0].g;
            for (int j = 1; j < k; ++j) s_eff += 2.0 * mult(j) * active[j].g;

            const int rows = 2 * n + 1 + k;
            MatrixXd jac = MatrixXd::Zero(rows, 2 * n + k);
            VectorXd rhs = VectorXd::Zero(rows);

            rhs.head(2 * n) = -(s_eff * zc) / hnorm;
            jac.topLeftCorner(2 * n, 2 * n) = s_eff / hnorm;
            jac.block(0, 2 * n, 2 * n, 1) = -2.0 * (active[0].g * zc) / hnorm;
            for (int j = 1; j < k; ++j)
                jac.block(0, 2 * n + j, 2 * n, 1) = 2.0 * (active[j].g * zc) / hnorm;
            jac.row(2 * n).head(2 * n) = al.m_im.transpose();
            rhs(2 * n) = -al.m_im.dot(zc);
            for (int j = 0; j < k; ++j) {
                const double scale = std::max(active[j].bound, 1e-300);
                const VectorXd gz = active[j].g * zc;
                jac.row(2 * n + 1 + j).head(2 * n) = 2.0 * gz.transpose() / scale;
                rhs(2 * n + 1 + j) = -(zc.dot(gz) - active[j].bound) / scale;
            }

            if (rhs.norm() <= 1e-13 * (1.0 + zc.norm())) {
                converged = true;
                break;
            }
            const VectorXd step = jac.colPivHouseholderQr().solve(rhs);
            zc += step.head(2 * n);
            mult += step.tail(k);
            if (step.norm() <= 1e-15 * (1.0 + zc.norm())) {
                converged = true;
                break;
            }
        }
        if (!converged) return;

        // Retry without constraints whose multiplier went negative: they
        // were slack after all.
        std::vector<Quad> keep;
        keep.push_back(std::move(active[0]));
        bool dropped = false;
        for (int j = 1; j < k; ++j) {
            if (mult(j) < -1e-9 * (1.0 + mult.cwiseAbs().maxCoeff()))
                dropped = true;
            else
                keep.push_back(std::move(active[j]));
        }
        if (dropped && pass < 3) {
            active = std::move(keep);
            continue;
        }

        VectorXcd i(n);
        for (int j = 0; j < n; ++j) i(j) = Complex(zc(j), zc(n + j));
        if (check_feasibility(model, i, beta0).max_violation > 1e-9) return;
        if (al.objective(zc) > al.objective(z) * (1.0 + 1e-12)) return;
        z = zc;
        return;
    }
}

double portable_uniform(std::mt19937_64& rng) {
    // [0,1) with 53 bits; avoids std::uniform_real_distribution, whose
    // output is not pinned down by the standard.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

CurrentSolution multistart_qcqp(const SystemModel& model, double beta0,
                                const OracleConfig& config) {
    if (beta0 <= 0.0) throw InvalidParams("beta0 must be positive");
    if (config.restarts < 1) throw InvalidParams("restarts must be >= 1");
    const int n = model.size();
    const auto& p = model.params;

    // Box scale for initialization: the peak-current limit where present,
    // otherwise the coupling-aligned magnitude that meets the load target.
    const double r0 = p.r0();
    const double c_load = p.omega * p.omega * p.rx.r_load_ohm / (2.0 * r0 * r0);
    const double mnorm = p.m.norm();
    if (mnorm == 0.0) throw ZeroCoupling("all TX-RX mutual inductances are zero");
    const double ref_scale = std::sqrt(beta0 / c_load) / mnorm;

    std::mt19937_64 rng(config.seed);

    bool found = false;
    CurrentSolution best;
    for (int restart = 0; restart < config.restarts; ++restart) {
        VectorXd z(2 * n);
        for (int k = 0; k < n; ++k) {
            const double box = p.tx[k].a_max_a ? *p.tx[k].a_max_a : ref_scale;
            z(k) = (2.0 * portable_uniform(rng) - 1.0) * box;
            z(n + k) = (2.0 * portable_uniform(rng) - 1.0) * box;
        }

        AugLag al(model, beta0);
        al.rho = std::max(1.0, al.objective(z));
        al.project(z);

        double prev_viol = std::numeric_limits<double>::infinity();
        for (int outer = 0; outer < config.outer_iters; ++outer) {
            double step = 1.0;
            for (int it = 0; it < config.max_iters; ++it) {
                const double f0 = al.value(z);
                const VectorXd grad = al.gradient(z);
                // Armijo backtracking on the projected step.
                VectorXd znew;
                double fnew = f0;
                bool accepted = false;
                step = std::min(step * 4.0, 1e6 / (1.0 + grad.norm()));
                while (step > 1e-18) {
                    znew = z - step * grad;
                    al.project(znew);
                    fnew = al.value(znew);
                    const double decrease = grad.dot(z - znew);
                    if (fnew <= f0 - 1e-4 * decrease) {
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!accepted) break;
                const double move = (znew - z).norm();
                z = znew;
                if (move <= config.step_tol * (1.0 + z.norm())) break;
            }

            const VectorXd g = al.constraints(z);
            const double viol = g.maxCoeff();
            for (int c = 0; c < g.size(); ++c)
                al.lambda(c) = std::max(0.0, al.lambda(c) + al.rho * g(c));
            if (outer > 3 && viol <= 1e-10) break;
            if (viol > std::max(1e-8, 0.25 * prev_viol)) al.rho *= 2.0;
            prev_viol = std::max(viol, 0.0);
        }

        polish_candidate(model, al, beta0, z);

        VectorXcd i(n);
        for (int k = 0; k < n; ++k) i(k) = Complex(z(k), z(n + k));

        // Rescue a marginally short load power by a uniform scale-up when
        // the limits leave room for it.
        const double p0 = load_power(model, i);
        if (p0 < beta0 && p0 > 0.0) {
            const VectorXcd scaled = std::sqrt(beta0 / p0) * i;
            if (check_feasibility(model, scaled, beta0).max_violation <= 1e-9) i = scaled;
        }

        CurrentSolution cand = make_solution(model, i, beta0, SolveStatus::Optimal);
        if (!cand.binding.feasible(1e-6)) continue;
        if (!found || cand.total_power < best.total_power) {
            best = cand;
            found = true;
        }
    }
    if (!found)
        throw NoFeasiblePointFound("no restart produced a feasible point (not an "
                                   "infeasibility certificate)");
    return best;
}

} // namespace magbeam
