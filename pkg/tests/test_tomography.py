import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_aqec.errors import InvalidArgument
from qudit_aqec.tomography import (
    PAULIS,
    ChiMatrix,
    ShotRecord,
    average_fidelity,
    chi_fidelity_from_average,
    chi_from_outputs,
    INPUT_STATES,
    process_tomography,
    project_psd,
    project_simplex,
    simulate_counts,
    state_tomography,
)

Zm = PAULIS[3]


def _rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def test_identity_process():
    chi = process_tomography(lambda r: r)
    assert np.allclose(chi.matrix, ChiMatrix.identity().matrix, atol=1e-12)
    assert chi.fidelity() == pytest.approx(1.0)


def test_z_flip():
    chi = process_tomography(lambda r: Zm @ r @ Zm)
    assert chi.matrix[3, 3].real == pytest.approx(1.0, abs=1e-12)
    assert chi.fidelity() == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("sigma", [0.1, 0.5, 1.0, 2.0])
def test_gaussian_dephasing(sigma):
    f = math.exp(-(sigma**2) / 2)

    def deph(r):
        out = r.astype(complex).copy()
        out[0, 1] *= f
        out[1, 0] *= f
        return out

    chi = process_tomography(deph)
    assert chi.fidelity() == pytest.approx(0.5 * (1 + f), abs=1e-12)


def test_leakage_admixture():
    chi = process_tomography(lambda r: 0.9 * r)
    # 0.9 * identity + 0.1 * fully depolarizing (chi_II = 1/4)
    assert chi.fidelity() == pytest.approx(0.925, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(-math.pi, math.pi), st.floats(0.0, 1.0))
def test_linear_inversion_is_exact(theta, p):
    def chan(r):
        return (1 - p) * _rz(theta) @ r @ _rz(theta).conj().T + p * Zm @ r @ Zm

    outs = [chan(np.outer(s, s.conj())) for s in INPUT_STATES]
    chi = chi_from_outputs(outs)
    rebuilt = sum(chi[m, n] * PAULIS[m] @ np.eye(2) @ PAULIS[n].conj().T for m in range(4) for n in range(4))
    assert np.trace(chi).real == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(rebuilt, chan(np.eye(2)), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=6))
def test_simplex_projection(values):
    x = project_simplex(np.array(values))
    assert np.all(x >= 0) and x.sum() == pytest.approx(1.0)


def test_psd_projection_keeps_valid_states():
    rho = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
    assert np.allclose(project_psd(rho), rho)
    bad = np.array([[1.2, 0], [0, -0.2]])
    assert np.allclose(project_psd(bad), np.diag([1, 0]))


def test_finite_shots_and_determinism():
    block = np.array([[0.5, 0.5], [0.5, 0.5]])
    a = simulate_counts(block, "X", 1000, seed=3)
    b = simulate_counts(block, "X", 1000, seed=3)
    assert a == b and a.counts[0] == 1000
    rec = [simulate_counts(block, bas, None) for bas in ("X", "Y", "Z")]
    assert np.allclose(state_tomography(rec), block)
    chi1 = process_tomography(lambda r: r, shots=200, seed=9)
    chi2 = process_tomography(lambda r: r, shots=200, seed=9)
    assert np.array_equal(chi1.matrix, chi2.matrix)
    assert 0.9 < chi1.fidelity() <= 1.0


def test_bad_records():
    with pytest.raises(InvalidArgument):
        ShotRecord("W", (1, 0, 0), 1)
    with pytest.raises(InvalidArgument):
        state_tomography([simulate_counts(np.eye(2) / 2, "X", None)])


def test_fidelity_conversions():
    assert average_fidelity(1.0) == 1.0
    assert chi_fidelity_from_average(average_fidelity(0.37)) == pytest.approx(0.37)
    js = ChiMatrix.identity().to_json()
    assert js["basis"] == ["I", "X", "Y", "Z"] and js["re"][0][0] == 1.0
