"""End-to-end checks of the Python bindings against known values."""

import json
import math
import os

import pytest

import magbeam

OMEGA = 6.78e6
R_TX = [0.336] * 5
M = [1.6121e-6, 7.81e-9, -2.96e-8, 7.81e-9, 1.508e-7]
M_TX = [
    [0.0, 3.565e-7, 1.253e-7, 3.565e-7, 2.984e-7],
    [3.565e-7, 0.0, 3.565e-7, 1.253e-7, 2.984e-7],
    [1.253e-7, 3.565e-7, 0.0, 3.565e-7, 2.984e-7],
    [3.565e-7, 1.253e-7, 3.565e-7, 0.0, 2.984e-7],
    [2.984e-7, 2.984e-7, 2.984e-7, 2.984e-7, 0.0],
]
V_MAX = [30.0 * math.sqrt(2.0)] * 5
A_MAX = [5.0 * math.sqrt(2.0)] * 5


def bench_kwargs(**extra):
    kw = dict(omega=OMEGA, r_tx=R_TX, r_parasitic=0.336, r_load=50.0,
              m=M, m_tx=M_TX)
    kw.update(extra)
    return kw


def scenario_path(name):
    return os.path.join(os.environ["MAGBEAM_SCENARIOS"], name)


def test_solve_bench_60w():
    out = magbeam.solve(beta0=60.0, v_max=V_MAX, a_max=A_MAX, **bench_kwargs())
    assert out["status"] == "optimal"
    assert out["total_power_w"] == pytest.approx(68.877, rel=5e-3)
    assert out["load_power_w"] == pytest.approx(60.0, rel=1e-6)
    mags = [abs(c) for c in out["currents"]]
    assert mags[0] == pytest.approx(7.0698, rel=1e-2)
    assert mags[4] == pytest.approx(0.6617, rel=1e-2)


def test_solve_infeasible_target():
    out = magbeam.solve(beta0=100.0, v_max=V_MAX, a_max=A_MAX, **bench_kwargs())
    assert out["status"] == "infeasible"


def test_unconstrained_matches_constrained_when_slack():
    free = magbeam.solve_unconstrained(beta0=60.0, **bench_kwargs())
    assert free["efficiency"] == pytest.approx(0.871, abs=5e-3)


def test_equal_current_efficiency():
    out = magbeam.equal_current(beta0=60.0, **bench_kwargs())
    assert out["efficiency"] == pytest.approx(0.620, abs=5e-3)


def test_max_deliverable_power():
    out = magbeam.max_deliverable_power(v_max=V_MAX, a_max=A_MAX, **bench_kwargs())
    assert out["beta_max_w"] == pytest.approx(73.6, rel=0.02)


def test_invalid_params_raise():
    bad = bench_kwargs()
    bad["r_tx"] = [-1.0] * 5
    with pytest.raises(magbeam.MagbeamError):
        magbeam.solve(beta0=60.0, **bad)


def test_geometry_helpers():
    coax = magbeam.mutual_inductance_coaxial(0.1, 0.1, 0.1)
    assert coax == pytest.approx(4.9407846307982733e-08, rel=1e-12)
    numeric = magbeam.mutual_inductance(
        center_a=[0.0, 0.0, 0.0], axis_a=[0.0, 0.0, 1.0], radius_a=0.1,
        turns_a=1, wire_radius_a=1e-3,
        center_b=[0.0, 0.0, 0.1], axis_b=[0.0, 0.0, 1.0], radius_b=0.1,
        turns_b=1, wire_radius_b=1e-3)
    assert numeric == pytest.approx(coax, rel=1e-6)
    self_l = magbeam.self_inductance_loop(0.1, 1e-3, 1)
    assert self_l == pytest.approx(5.886856715424859e-07, rel=1e-12)


def test_scenario_file_roundtrip():
    text = magbeam.solve_scenario_file(scenario_path("five_tx_bench.json"))
    report = json.loads(text)
    assert report["results"]["sdp"]["total_power_w"] == pytest.approx(68.877, rel=5e-3)
    # Deterministic output.
    assert magbeam.solve_scenario_file(scenario_path("five_tx_bench.json")) == text


def test_sweep_scenario_file():
    csv_text = magbeam.sweep_scenario_file(scenario_path("five_tx_sweep.json"))
    lines = csv_text.strip().splitlines()
    assert lines[0].startswith("beta0,mode,status")
    assert len(lines) == 1 + 3 * 8  # header + 3 modes x 8 grid points
