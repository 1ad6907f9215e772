#include "support.hpp"

#include <cmath>
#include <numbers>

namespace magbeam::testing {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

SystemParams bench5_params(bool with_limits) {
    SystemParams p;
    p.omega = 6.78e6;
    const double v_lim = 30.0 * std::numbers::sqrt2;
    const double a_lim = 5.0 * std::numbers::sqrt2;
    for (int k = 0; k < 5; ++k) {
        TxCoil c;
        c.r_ohm = 0.336;
        if (with_limits) {
            c.v_max_v = v_lim;
            c.a_max_a = a_lim;
        }
        p.tx.push_back(c);
    }
    p.rx = {0.336, 50.0};
    p.m = VectorXd(5);
    p.m << 1.6121e-6, 0.00781e-6, -0.0296e-6, 0.00781e-6, 0.1508e-6;
    p.m_tx = MatrixXd(5, 5);
    p.m_tx << 0, 0.3565, 0.1253, 0.3565, 0.2984,
              0.3565, 0, 0.3565, 0.1253, 0.2984,
              0.1253, 0.3565, 0, 0.3565, 0.2984,
              0.3565, 0.1253, 0.3565, 0, 0.2984,
              0.2984, 0.2984, 0.2984, 0.2984, 0;
    p.m_tx *= 1e-6;
    return p;
}

SystemModel bench5_model(bool with_limits) { return build_system(bench5_params(with_limits)); }

SystemParams unit1_params() {
    SystemParams p;
    p.omega = 1.0;
    TxCoil c;
    c.r_ohm = 1.0;
    p.tx.push_back(c);
    p.rx = {0.0, 1.0};
    p.m = VectorXd::Constant(1, 1.0);
    p.m_tx = MatrixXd::Zero(1, 1);
    return p;
}

SystemModel unit1_model() { return build_system(unit1_params()); }

RandomInstance random_feasible_instance(std::mt19937_64& rng, bool with_limits) {
    const int n = 2 + static_cast<int>(rng() % 5);  // N in {2..6}
    SystemParams p;
    p.omega = uniform(rng, 1e6, 1e7);
    for (int k = 0; k < n; ++k) {
        TxCoil c;
        c.r_ohm = uniform(rng, 0.1, 2.0);
        p.tx.push_back(c);
    }
    p.rx.r_parasitic_ohm = uniform(rng, 0.0, 1.0);
    p.rx.r_load_ohm = uniform(rng, 1.0, 100.0);
    p.m = VectorXd(n);
    for (int k = 0; k < n; ++k) {
        const double sign = rng() % 2 ? 1.0 : -1.0;
        p.m(k) = sign * uniform(rng, 0.2, 2.0) * 1e-6;
    }
    p.m_tx = MatrixXd::Zero(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = r + 1; c < n; ++c) {
            const double sign = rng() % 2 ? 1.0 : -1.0;
            p.m_tx(r, c) = p.m_tx(c, r) = sign * uniform(rng, 0.0, 0.5) * 1e-6;
        }

    RandomInstance inst;
    inst.feasible_point = VectorXcd(n);
    for (int k = 0; k < n; ++k) {
        const double mag = uniform(rng, 0.5, 5.0);
        const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        inst.feasible_point(k) = std::polar(mag, phase);
    }

    SystemModel model = build_system(p);
    inst.beta0 = load_power(model, inst.feasible_point);
    if (inst.beta0 <= 1e-9) {
        // Couplings happened to cancel; realign the point with m.
        for (int k = 0; k < n; ++k)
            inst.feasible_point(k) = std::abs(inst.feasible_point(k)) *
                                     (p.m(k) >= 0 ? 1.0 : -1.0);
        inst.beta0 = load_power(model, inst.feasible_point);
    }

    if (with_limits) {
        const VectorXcd v = tx_voltages(model, inst.feasible_point);
        for (int k = 0; k < n; ++k) {
            // Tight with probability ~1/2, comfortably slack otherwise.
            const double fv = rng() % 2 ? uniform(rng, 1.0005, 1.05) : uniform(rng, 1.5, 3.0);
            const double fa = rng() % 2 ? uniform(rng, 1.0005, 1.05) : uniform(rng, 1.5, 3.0);
            p.tx[k].v_max_v = std::max(std::abs(v(k)) * fv, 1e-6);
            p.tx[k].a_max_a = std::max(std::abs(inst.feasible_point(k)) * fa, 1e-6);
        }
    }
    inst.params = p;
    return inst;
}

} // namespace magbeam::testing
