#include <doctest.h>

#include <random>

#include "magbeam/baseline.hpp"
#include "magbeam/sdp.hpp"
#include "support.hpp"

using namespace magbeam;
using namespace magbeam::testing;

TEST_CASE("equal-current efficiency at 60 W") {
    const CurrentSolution sol = equal_current_min_power(bench5_model(false), 60.0);
    CHECK(sol.status == SolveStatus::Optimal);
    CHECK(sol.efficiency == doctest::Approx(0.620).epsilon(8e-3));
    CHECK(sol.load_power == doctest::Approx(60.0).epsilon(1e-9));
    // All currents identical and in phase.
    for (int k = 1; k < 5; ++k)
        CHECK(sol.currents(k) == sol.currents(0));
}

TEST_CASE("equal-current scheme hits the voltage wall first") {
    const SystemModel model = bench5_model();
    const auto [beta_max, sol] = equal_current_max_power(model);
    CHECK(beta_max == doctest::Approx(36.0).epsilon(0.03));
    CHECK(std::abs(sol.currents(0)) == doctest::Approx(5.1499).epsilon(1e-3));
    const auto binding = sol.binding.binding_names();
    CHECK(std::find(binding.begin(), binding.end(), "v_1") != binding.end());

    // Feasible just below, infeasible just above.
    CHECK(equal_current_min_power(model, 36.0).status == SolveStatus::Optimal);
    CHECK(equal_current_min_power(model, 40.0).status == SolveStatus::Infeasible);
}

TEST_CASE("equal-current maximum with current limits only") {
    SystemParams p = bench5_params();
    for (auto& t : p.tx) t.v_max_v.reset();
    const auto [beta_max, sol] = equal_current_max_power(build_system(p));
    CHECK(beta_max == doctest::Approx(69.4).epsilon(5e-3));
    CHECK(std::abs(sol.currents(0)) ==
          doctest::Approx(5.0 * std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("equal-current error conditions") {
    SystemParams p = bench5_params();
    p.m(0) = 1e-6;
    p.m(1) = -1e-6;
    p.m(2) = 1e-6;
    p.m(3) = -1e-6;
    p.m(4) = 0.0;
    const SystemModel cancel = build_system(p);
    CHECK_THROWS_AS(equal_current_min_power(cancel, 10.0), ZeroCoupling);
    CHECK_THROWS_AS(equal_current_max_power(bench5_model(false)), Unbounded);
    CHECK_THROWS_AS(equal_current_min_power(bench5_model(), 0.0), InvalidParams);
}

TEST_CASE("oracle matches the relaxation pipeline on the bench system") {
    const SystemModel model = bench5_model();
    for (double beta0 : {60.0, 73.5}) {
        const CurrentSolution o = multistart_qcqp(model, beta0);
        const CurrentSolution s = solve_p1(model, beta0);
        REQUIRE(o.status == SolveStatus::Optimal);
        CHECK(o.total_power == doctest::Approx(s.total_power).epsilon(1e-6));
    }
}

TEST_CASE("oracle matches the relaxation pipeline on random instances") {
    std::mt19937_64 rng(515);
    int done = 0;
    while (done < 10) {
        const RandomInstance inst = random_feasible_instance(rng);
        const SystemModel m2 = build_system(inst.params);
        const CurrentSolution s = solve_p1(m2, inst.beta0);
        if (s.status != SolveStatus::Optimal) continue;
        const CurrentSolution o = multistart_qcqp(m2, inst.beta0);
        CHECK(std::abs(o.total_power - s.total_power) <= 1e-4 * s.total_power);
        // Never below the relaxation bound.
        const SdrSolution sdr = solve_sdr(formulate(m2, inst.beta0));
        CHECK(o.total_power >= sdr.objective * (1.0 - 1e-6));
        ++done;
    }
}

TEST_CASE("oracle is deterministic for a fixed seed") {
    const SystemModel model = bench5_model();
    const CurrentSolution a = multistart_qcqp(model, 60.0);
    const CurrentSolution b = multistart_qcqp(model, 60.0);
    CHECK((a.currents - b.currents).norm() == 0.0);
    CHECK(a.total_power == b.total_power);

    OracleConfig other;
    other.seed = 99;
    const CurrentSolution c = multistart_qcqp(model, 60.0, other);
    CHECK(c.total_power == doctest::Approx(a.total_power).epsilon(1e-7));
}

TEST_CASE("oracle reports when no feasible point is found") {
    OracleConfig cfg;
    cfg.restarts = 5;
    cfg.max_iters = 100;
    cfg.outer_iters = 8;
    CHECK_THROWS_AS(multistart_qcqp(bench5_model(), 100.0, cfg), NoFeasiblePointFound);
}
