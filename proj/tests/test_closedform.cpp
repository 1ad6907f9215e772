#include <doctest.h>

#include <random>

#include "magbeam/closedform.hpp"
#include "support.hpp"

using namespace magbeam;
using namespace magbeam::testing;

TEST_CASE("unit single-TX system") {
    const SystemModel model = unit1_model();
    const ClosedFormSolution cf = solve_unconstrained(model, 0.5);
    CHECK(cf.currents(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cf.solution.load_power == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(cf.solution.total_power == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cf.dual_v == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(cf.solution.efficiency == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(cf.duality_gap < 1e-9);
}

TEST_CASE("bench system reproduces the published optimum") {
    const SystemModel model = bench5_model(false);
    const ClosedFormSolution cf = solve_unconstrained(model, 60.0);

    // Dominant TX carries almost all the current; weakly coupled coils
    // nearly shut off.
    CHECK(std::abs(cf.currents(0)) == doctest::Approx(7.0698).epsilon(2e-4));
    CHECK(cf.solution.efficiency == doctest::Approx(0.8712).epsilon(2e-3));
    CHECK(cf.dual_v == doctest::Approx(1.0 / 0.8712).epsilon(2e-3));
    CHECK(cf.solution.load_power == doctest::Approx(60.0).epsilon(1e-9));

    // Currents are proportional to the coupling vector (identical r).
    const VectorXd ratio = cf.currents / cf.currents(0);
    const VectorXd expected = model.params.m / model.params.m(0);
    CHECK((ratio - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("identical-resistance closed form agrees with bisection") {
    const SystemModel model = bench5_model(false);
    for (double beta0 : {1.0, 10.0, 60.0, 250.0}) {
        const ClosedFormSolution a = solve_unconstrained(model, beta0);
        const ClosedFormSolution b = solve_identical_r(model, beta0);
        CHECK(b.dual_v == doctest::Approx(a.dual_v).epsilon(1e-9));
        CHECK((a.currents - b.currents).norm() < 1e-9 * a.currents.norm());
        CHECK(b.solution.total_power ==
              doctest::Approx(a.solution.total_power).epsilon(1e-9));
    }
}

TEST_CASE("identical-resistance route rejects mixed resistances") {
    SystemParams p = bench5_params(false);
    p.tx[1].r_ohm = 0.5;
    const SystemModel model = build_system(p);
    CHECK_THROWS_AS(solve_identical_r(model, 10.0), NotIdenticalResistances);
    CHECK_NOTHROW(solve_unconstrained(model, 10.0));
}

TEST_CASE("current scaling and constant efficiency in the target power") {
    const SystemModel model = bench5_model(false);
    const ClosedFormSolution base = solve_unconstrained(model, 15.0);
    const ClosedFormSolution scaled = solve_unconstrained(model, 60.0);
    CHECK((scaled.currents - 2.0 * base.currents).norm() < 1e-8 * scaled.currents.norm());

    const double eta = base.solution.efficiency;
    for (double beta0 : {1.0, 10.0, 100.0}) {
        const ClosedFormSolution cf = solve_unconstrained(model, beta0);
        CHECK(cf.solution.efficiency == doctest::Approx(eta).epsilon(1e-9));
        CHECK(cf.solution.load_power == doctest::Approx(beta0).epsilon(1e-9));
    }
}

TEST_CASE("two-TX current split follows the coupling ratio") {
    SystemParams p;
    p.omega = 1e6;
    p.tx.assign(2, TxCoil{0.5, std::nullopt, std::nullopt});
    p.rx = {0.1, 10.0};
    p.m = VectorXd(2);
    p.m << 2e-6, 1.5e-6;
    p.m_tx = MatrixXd::Zero(2, 2);
    const SystemModel model = build_system(p);

    const ClosedFormSolution cf = solve_unconstrained(model, 5.0);
    CHECK(cf.currents(1) / cf.currents(0) == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(cf.solution.load_power == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("optimal currents lie in the null space of the dual matrix") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        SystemParams p = random_feasible_instance(rng, false).params;
        // Mixed resistances exercise the general bisection path.
        const SystemModel model = build_system(p);
        const ClosedFormSolution cf = solve_unconstrained(model, 3.0);

        const auto& q = model.params;
        const double coeff = q.omega * q.omega *
                             (q.r0() - cf.dual_v * q.rx.r_load_ohm) /
                             (q.r0() * q.r0());
        MatrixXd t = coeff * (q.m * q.m.transpose());
        for (int k = 0; k < model.size(); ++k) t(k, k) += q.tx[k].r_ohm;

        CHECK((t * cf.currents).norm() <= 1e-7 * t.norm() * cf.currents.norm());
        CHECK(cf.solution.load_power == doctest::Approx(3.0).epsilon(1e-7));
        CHECK(cf.duality_gap < 1e-7);
        // Sign convention: m^T i >= 0.
        CHECK(q.m.dot(cf.currents) >= 0.0);
    }
}

TEST_CASE("degenerate inputs are rejected") {
    SystemParams p = bench5_params(false);
    p.m.setZero();
    const SystemModel model = build_system(p);
    CHECK_THROWS_AS(solve_unconstrained(model, 10.0), ZeroCoupling);
    CHECK_THROWS_AS(solve_unconstrained(bench5_model(false), -1.0), InvalidParams);
    CHECK_THROWS_AS(solve_unconstrained(bench5_model(false), 0.0), InvalidParams);
}
