"""Smoke tests for the python bindings.

These exercise the binding layer end to end — scenario execution, config
runs, direct verification through numpy matrices, and the packet helpers.
The physics itself is covered by the C++ suites; here we pin the python
surface: shapes, keys, defaults, and error translation.
"""

import json
import math

import numpy as np
import pytest

import powerbound as pb


def test_module_constants():
    assert pb.REPORT_SCHEMA == "powerbound-report/1"
    assert pb.OUTPUT_DIR_ENV == "POWERBOUND_OUTPUT_DIR"


def test_scenario_catalogue():
    catalogue = {entry["kind"]: entry for entry in pb.list_scenarios()}
    assert set(catalogue) == {
        "twin_oscillator",
        "nonautonomous_control",
        "qubit_saturation",
        "random_clock_ensemble",
        "commuting_triviality",
    }
    assert catalogue["random_clock_ensemble"]["needs_seed"]
    assert not catalogue["twin_oscillator"]["needs_seed"]
    twin_params = {p["name"]: p for p in catalogue["twin_oscillator"]["parameters"]}
    assert "omega" in twin_params and twin_params["omega"]["type"] == "number"
    assert "work_closed_form" in catalogue["twin_oscillator"]["checks"]


def test_twin_scenario_swaps_one_quantum():
    out = pb.run_scenario(
        "twin_oscillator", name="swap", params={"tau": math.pi / 2}
    )
    assert out["kind"] == "twin_oscillator"
    assert out["name"] == "swap"
    assert out["pass"]
    # The exchange coupling is switched on externally, so the scenario is
    # non-autonomous by design and flags its expected violation.
    assert not out["autonomous"]
    assert out["bound_report"]["violation_expected"]
    # A full excitation swap at g*tau = pi/2 moves exactly one quantum.
    assert math.isclose(out["bound_report"]["work"], 1.0, abs_tol=1e-9)
    checks = {c["name"]: c for c in out["checks"]}
    assert checks["work_closed_form"]["pass"]


def test_tolerance_override_can_fail_a_check():
    out = pb.run_scenario(
        "twin_oscillator",
        params={"omega": 0.9, "g": 1.1, "tau": 0.7},
        tolerances={"work_closed_form": 0.0},
    )
    assert not out["pass"]
    closed_form = next(c for c in out["checks"] if c["name"] == "work_closed_form")
    assert not closed_form["pass"]


def test_control_scenario_flags_designed_violation():
    out = pb.run_scenario("nonautonomous_control")
    assert out["pass"]
    assert not out["autonomous"]
    report = out["bound_report"]
    assert not report["condition1_ok"]
    assert report["violation_expected"]


def test_seeded_scenarios_require_a_seed():
    with pytest.raises(ValueError, match="seed"):
        pb.run_scenario("random_clock_ensemble")
    out = pb.run_scenario("random_clock_ensemble", seed=7, params={"n_models": 3})
    assert out["pass"]


def test_distribution_check_appears_on_request():
    plain = pb.run_scenario("qubit_saturation")
    spectral = pb.run_scenario("qubit_saturation", emit_distributions=True)
    plain_names = {c["name"] for c in plain["checks"]}
    spectral_names = {c["name"] for c in spectral["checks"]}
    assert "distribution_mean_shift" not in plain_names
    assert "distribution_mean_shift" in spectral_names


def test_run_config_returns_schema_report():
    config = json.dumps(
        {
            "scenarios": [
                {"kind": "twin_oscillator", "name": "swap"},
                {"kind": "commuting_triviality", "name": "inert", "seed": 3},
            ]
        }
    )
    report = json.loads(pb.run_config(config))
    assert report["schema"] == pb.REPORT_SCHEMA
    assert report["overall_pass"] is True
    assert report["scenario_count"] == 2
    assert [entry["name"] for entry in report["scenarios"]] == ["swap", "inert"]
    assert all(entry["pass"] for entry in report["scenarios"])


def test_config_errors_become_value_errors():
    with pytest.raises(ValueError, match="scenarios"):
        pb.run_config(json.dumps({"scenarios": []}))
    with pytest.raises(ValueError, match="not-a-kind"):
        pb.run_config(json.dumps({"scenarios": [{"kind": "not-a-kind"}]}))


def test_sweep_config_names_points_after_values():
    config = json.dumps({"scenarios": [{"kind": "twin_oscillator", "name": "swap"}]})
    report = json.loads(pb.sweep_config(config, "tau", [0.25, 0.5]))
    names = [entry["name"] for entry in report["scenarios"]]
    assert names == ["swap_tau_0.25", "swap_tau_0.5"]
    works = [entry["bound_report"]["work"] for entry in report["scenarios"]]
    # Work grows monotonically while g*tau stays below the half swap.
    assert 0.0 < works[0] < works[1]


def test_verify_model_accepts_numpy_matrices():
    sz = np.diag([1.0, -1.0]).astype(complex)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    half = np.eye(2, dtype=complex) / 2.0
    report = pb.verify_model(
        h_s=sz,
        h_a=sx,
        v=np.zeros((4, 4), dtype=complex),
        rho_s=half,
        sigma_a=half,
        tau=1.0,
    )
    assert report["pass"]
    assert report["condition1_ok"]
    assert abs(report["work"]) < 1e-12
    # sx has unit spread in the maximally mixed state: ceiling 2|sz| * 1.
    assert math.isclose(report["rhs_fluctuation"], 2.0, rel_tol=1e-12)
    assert math.isclose(report["timescale_estimate"], 0.5, rel_tol=1e-12)


def test_bound_helpers_keep_their_ordering():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h_a = (a + a.conj().T) / 2.0
    psi = rng.normal(size=3) + 1j * rng.normal(size=3)
    psi /= np.linalg.norm(psi)
    sigma = 0.8 * np.outer(psi, psi.conj()) + 0.2 * np.eye(3) / 3.0
    h_s = np.diag([1.5, -0.5, 0.25]).astype(complex)
    tight = pb.bound_commutator(h_s, h_a, sigma)
    loose = pb.bound_fluctuation(h_s, h_a, sigma)
    assert 0.0 < tight <= loose + 1e-12
    assert math.isclose(
        pb.detectability_timescale(h_s), 1.0 / 3.0, rel_tol=1e-12
    )


def test_optimal_packet_reaches_minimal_uncertainty():
    x, psi = pb.optimal_wavefunction(1.0, 2001)
    assert x[0] == pytest.approx(-1.0) and x[-1] == pytest.approx(0.0)
    assert psi.shape == (2001,)
    mean, second = pb.clock_momentum_moments(-1.0, 0.0, psi)
    spread = math.sqrt(second - mean * mean)
    # Unit support, hbar = 1: the sine packet sits at spread pi.
    assert abs(spread - math.pi) < 1e-3
    vx, vpsi = pb.variational_minimize(1.0, 801)
    vmean, vsecond = pb.clock_momentum_moments(-1.0, 0.0, vpsi)
    vspread = math.sqrt(vsecond - vmean * vmean)
    assert abs(vspread - math.pi) < 1e-2


def test_norm_helpers():
    sy = np.array([[0.0, -1j], [1j, 0.0]])
    assert pb.trace_norm(sy) == pytest.approx(2.0)
    assert pb.operator_norm(sy) == pytest.approx(1.0)
