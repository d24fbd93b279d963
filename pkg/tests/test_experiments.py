import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_aqec.codes import build_code
from qudit_aqec.engine import CycleConfig
from qudit_aqec.errors import InvalidArgument
from qudit_aqec.experiments import (
    BUDGET_SOURCES,
    BudgetMagnitudes,
    ExperimentConfig,
    FitResult,
    analytic_aqec_fidelity,
    analytic_physical_fidelity,
    analytic_uncorrected_fidelity,
    bootstrap_errors,
    brute_force_cycle_p,
    cycle_infidelity,
    error_budget,
    fit_gaussian_decay,
    gaussian_decay,
    lambda_factor,
    phase_rotation_scan,
    run_lifetime,
    z_error_probability,
)
from qudit_aqec.noise import NoiseSchedule

CODE = build_code()
SCHED = NoiseSchedule.from_g_factor(16e-9, 0.1, 0.1)


def test_analytic_limits():
    assert analytic_physical_fidelity(0.0) == 1.0
    assert analytic_uncorrected_fidelity(0.0) == pytest.approx(1.0)
    assert analytic_physical_fidelity(50.0) == pytest.approx(0.5)
    assert analytic_uncorrected_fidelity(50.0) == pytest.approx(5 / 12)
    assert z_error_probability(0.0) == pytest.approx(0.0, abs=1e-15)
    assert analytic_aqec_fidelity(0.3, 0) == pytest.approx(1.0)
    assert analytic_aqec_fidelity(0.3, 0, "quasi-static") == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        analytic_aqec_fidelity(0.3, 1, "pink")


@pytest.mark.parametrize("sigma", [1e-2, 2e-2, 5e-2])
def test_p_is_quartic(sigma):
    assert z_error_probability(sigma) == pytest.approx(9 / 16 * sigma**4, rel=0.05)


def test_p_brute_force():
    assert brute_force_cycle_p(0.3) == pytest.approx(z_error_probability(0.3), abs=1e-3)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.3e-3, 5e-3), st.floats(0.0, 0.5))
def test_fit_recovers_parameters(A, tau, C):
    C = min(C, 1 - A)
    t = np.linspace(0, 3 * tau, 25)
    fit = fit_gaussian_decay(t, gaussian_decay(t, A, tau, C))
    assert fit.tau == pytest.approx(tau, rel=1e-6)
    assert fit.A == pytest.approx(A, abs=1e-6) and fit.C == pytest.approx(C, abs=1e-6)


def test_fit_with_noise_has_errors():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 3e-3, 20)
    f = gaussian_decay(t, 0.5, 1e-3, 0.5) + rng.normal(0, 0.005, t.size)
    fit = fit_gaussian_decay(t, f)
    assert abs(fit.tau - 1e-3) < 4 * fit.errors["tau"]
    with pytest.raises(InvalidArgument):
        fit_gaussian_decay(t[:3], f[:3])


def test_lambda_propagation():
    a = FitResult(0.5, 10.0, 0.5, {"tau": 1.0}, 0.0)
    b = FitResult(0.5, 1.0, 0.5, {"tau": 0.1}, 0.0)
    lam = lambda_factor(a, b)
    assert lam.value == pytest.approx(10.0) and lam.error == pytest.approx(10 * math.sqrt(0.02))


def test_bootstrap():
    assert bootstrap_errors(np.full(50, 0.7)) == (0.7, 0.7)
    x = np.random.default_rng(1).normal(0.9, 0.01, 100)
    lo, hi = bootstrap_errors(x)
    assert lo < x.mean() < hi
    assert hi - lo == pytest.approx(2 * 1.96 * 0.001, rel=0.25)
    with pytest.raises(InvalidArgument):
        bootstrap_errors(np.ones(5))


def test_rotation_scan():
    phi = np.linspace(-math.pi, math.pi, 41)
    scan = phase_rotation_scan(CODE, phi)
    assert np.allclose(scan.total, 1.0, atol=1e-12)
    small = phase_rotation_scan(CODE, [1e-4]).plus_E[0]
    assert small / 1e-8 == pytest.approx(0.75, abs=1e-6)
    noisy = phase_rotation_scan(CODE, phi, shots=100, seed=3)
    assert np.allclose(noisy.total, 1.0)


def test_ideal_cycle_has_no_infidelity():
    cfg = CycleConfig(tau_ec=620e-6, tau_i=120e-6)
    for space in "LE":
        assert cycle_infidelity(CODE, cfg, space) < 1e-8


@pytest.mark.slow
def test_budget_rows():
    rows = error_budget()
    assert [r.source for r in rows] == list(BUDGET_SOURCES) + ["Total"]
    assert rows[-1].from_error == pytest.approx(sum(r.from_error for r in rows[:-1]))
    nbar = rows[BUDGET_SOURCES.index("Nonzero phonon mode occupation")]
    assert 0.007 <= nbar.from_logical <= 0.028


def test_budget_all_off():
    mags = BudgetMagnitudes(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    cyc = CycleConfig(tau_ec=620e-6, tau_i=120e-6, stark_shift=1e-30)
    rows = error_budget(cycle=cyc, magnitudes=mags, include_pulse=False)
    assert all(r.from_error <= 1e-8 and r.from_logical <= 1e-8 for r in rows)


def _cfg(tag, **kw):
    base = dict(times=tuple(np.linspace(0, 2e-3, 5)), trajectories=40, seed=11)
    if tag == "logical-aqec":
        base = dict(cycles=(0, 1, 2), trajectories=20, seed=11)
    base.update(kw)
    return ExperimentConfig(tag, SCHED, **base)


@pytest.mark.parametrize("tag", ["physical", "ground", "logical-plain", "logical-aqec"])
def test_threads_do_not_change_results(tag):
    a = run_lifetime(_cfg(tag), threads=1)
    b = run_lifetime(_cfg(tag), threads=3)
    assert np.array_equal(a.samples, b.samples)
    assert a.fidelity[0] == pytest.approx(1.0, abs=1e-12)


def test_physical_mc_matches_analytic():
    sd = SCHED.sensitivity * SCHED.field_sigma
    sig = (0.5, 1.0)
    curve = run_lifetime(_cfg("physical", times=tuple(s / sd for s in sig), trajectories=2000))
    for s, f, se in zip(sig, curve.fidelity, curve.stderr):
        assert abs(f - analytic_physical_fidelity(s)) < 3 * se


def test_finite_shots_are_reproducible():
    a = run_lifetime(_cfg("physical", shots=50))
    b = run_lifetime(_cfg("physical", shots=50))
    assert np.array_equal(a.samples, b.samples)


def test_config_validation():
    with pytest.raises(InvalidArgument):
        ExperimentConfig("nope", SCHED, times=(0.0,))
    with pytest.raises(InvalidArgument):
        ExperimentConfig("physical", SCHED, times=(1.0, 0.5))
    with pytest.raises(InvalidArgument):
        ExperimentConfig("physical", SCHED, times=(0.0,), metric="trace")
    cfg = _cfg("logical-aqec")
    assert cfg.sample_times[1] == pytest.approx(740e-6)
