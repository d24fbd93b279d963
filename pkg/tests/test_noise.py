import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from qudit_aqec.algebra import KrausChannel, ket_to_dm, spin_operators, trace_distance
from qudit_aqec.codes import build_code
from qudit_aqec.errors import InvalidArgument, TruncationTooSmall
from qudit_aqec.noise import (
    DephasingParams,
    InstrumentImperfections,
    NoiseSchedule,
    NoiseTrajectory,
    averaged_rotation_channel,
    coherent_rotation,
    field_to_detuning,
    lindblad_kraus,
    lindblad_rhs,
    required_kraus_order,
    sample_trajectory,
    thermal_phonon_state,
    thermal_populations,
)

SZ52 = spin_operators("5/2").z
SZ12 = spin_operators("1/2").z


def test_kraus_identity_at_zero():
    ch = lindblad_kraus(DephasingParams(0.0, 1.0), SZ52)
    assert len(ch) == 1 and np.allclose(ch.ops[0], np.eye(6))


def test_qubit_dephasing_closed_form():
    plus = np.array([1, 1]) / math.sqrt(2)
    out = lindblad_kraus(DephasingParams(0.1, 1.0), SZ12)(ket_to_dm(plus))
    # coherence between m = -1/2 and +1/2 decays as exp(-kt (dm)^2 / 2)
    assert np.vdot(plus, out @ plus).real == pytest.approx((1 + math.exp(-0.1 / 2)) / 2, abs=1e-10)


def test_completeness_spin52():
    # jump weights are Poisson with mean kt m^2 = 1.25 on m = 5/2: eight jumps leave a 6.7e-6 tail
    with pytest.raises(TruncationTooSmall):
        lindblad_kraus(DephasingParams(0.2, 1.0, l_max=8), SZ52)
    tail = 1 - math.exp(-1.25) * sum(1.25**l / math.factorial(l) for l in range(9))
    assert tail == pytest.approx(6.71e-6, rel=1e-2)
    order = required_kraus_order(0.2, SZ52)
    ch = lindblad_kraus(DephasingParams(0.2, 1.0, l_max=order), SZ52)
    assert ch.completeness_defect < 1e-10


def test_lindblad_integration_matches_kraus():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=6) + 1j * rng.normal(size=6)
    rho0 = ket_to_dm(psi / np.linalg.norm(psi))

    def f(t, y):
        return lindblad_rhs(y.reshape(6, 6), 1.0, SZ52).ravel()

    sol = solve_ivp(f, (0, 0.1), rho0.ravel(), rtol=1e-11, atol=1e-12)
    rho_t = sol.y[:, -1].reshape(6, 6)
    ch = lindblad_kraus(DephasingParams(1.0, 0.1), SZ52)
    assert trace_distance(rho_t, ch(rho0)) < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_rhs_traceless_and_populations_fixed(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = A @ A.conj().T
    rho /= np.trace(rho)
    d = lindblad_rhs(rho, 0.7, SZ52)
    assert abs(np.trace(d)) < 1e-12
    assert np.allclose(np.diag(d), 0, atol=1e-12)
    assert np.allclose(lindblad_rhs(np.diag(np.diag(rho)), 0.7, SZ52), 0)


def test_coherent_rotation_expansion():
    c = build_code("5/2")
    th = 1e-4
    out = coherent_rotation(th, SZ52) @ c.zero_L
    first = (out - c.zero_L) / th
    assert np.allclose(first, 1j * math.sqrt(3) / 2 * c.zero_E, atol=1e-3)
    # second-order code-space coefficient: <0_L|U|0_L> = 1 - (3/8) th^2 + ...
    th = 1e-2
    amp = np.vdot(c.zero_L, coherent_rotation(th, SZ52) @ c.zero_L)
    assert (1 - amp.real) / th**2 == pytest.approx(3 / 8, rel=1e-3)
    assert np.allclose(coherent_rotation(0.0, SZ52), np.eye(6))


@pytest.mark.parametrize("sigma", [0.0, 0.3, 1.0, 2.0])
def test_averaged_rotation_coherence(sigma):
    ch = averaged_rotation_channel(sigma, SZ12, order=41)
    assert isinstance(ch, KrausChannel) and ch.completeness_defect < 1e-10
    out = ch(np.full((2, 2), 0.5))
    assert abs(out[0, 1]) * 2 == pytest.approx(math.exp(-(sigma**2) / 2), abs=1e-8)


def test_averaged_rotation_matches_sampling():
    rng = np.random.default_rng(3)
    plus = ket_to_dm(np.array([1, 1]) / math.sqrt(2))
    thetas = rng.normal(0, 0.8, size=100_000)
    samples = np.cos(thetas)  # 2 Re rho_01 after rotation
    est = samples.mean()
    se = samples.std() / math.sqrt(samples.size)
    exact = 2 * averaged_rotation_channel(0.8, SZ12)(plus)[0, 1].real
    assert abs(est - exact) < 3 * se


def test_field_conversion():
    assert field_to_detuning(0.0) == 0.0
    assert field_to_detuning(16e-9) / (2 * math.pi) == pytest.approx(268.7, abs=0.5)
    assert field_to_detuning(32e-9, 2) == pytest.approx(4 * field_to_detuning(16e-9))


def test_trajectory_sampling():
    s = NoiseSchedule.from_g_factor(0.0, 0.1, 0.35)
    traj = sample_trajectory(s, 1)
    assert len(traj.segments) == 4
    assert all(d == 0 for _, d in traj.segments)
    s = NoiseSchedule.from_g_factor(16e-9, 0.1, 0.1)
    fields = np.array([sample_trajectory(s, i).segments[0][1] for i in range(10_000)]) / s.sensitivity
    assert np.var(fields) == pytest.approx((16e-9) ** 2, rel=0.05)
    a = sample_trajectory(s, 7)
    b = sample_trajectory(s, 7)
    assert a == b


def test_quasi_static_phase():
    traj = NoiseTrajectory(((0.1, 250.0),))
    assert traj.phase(0.0, 1e-3) == pytest.approx(0.25)


def test_schedule_validation():
    with pytest.raises(InvalidArgument):
        NoiseSchedule(1e-9, 0.0, 1.0)
    with pytest.raises(InvalidArgument):
        NoiseSchedule(1e-9, 0.1, 1.0, regime="pink")


def test_thermal_state():
    assert np.allclose(thermal_phonon_state(0.0, 4), np.diag([1, 0, 0, 0]))
    p = thermal_populations(0.02, 6)
    assert p[1] == pytest.approx(0.02 / 1.02**2, rel=1e-6)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_imperfection_validation():
    with pytest.raises(InvalidArgument):
        InstrumentImperfections(nbar=-1)
    assert InstrumentImperfections(mode_drift_pp=4.0).mode_drift_sigma == 1.0
