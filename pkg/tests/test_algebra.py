from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_aqec.algebra import (
    FockSpace,
    KrausChannel,
    SpinManifold,
    apply_channel,
    check_density_matrix,
    dag,
    evolve,
    is_hermitian,
    ket_to_dm,
    parse_spin,
    partial_trace,
    propagator,
    spin_operators,
    state_fidelity,
    tensor,
    trace_distance,
)
from qudit_aqec.errors import InvalidArgument

SPINS = ["1/2", "1", "3/2", "2", "5/2", "7/2"]


def test_parse_spin_forms():
    assert parse_spin("5/2") == Fraction(5, 2)
    assert parse_spin(2.5) == Fraction(5, 2)
    assert parse_spin(Fraction(3, 2)) == Fraction(3, 2)
    with pytest.raises(InvalidArgument):
        parse_spin("1/3")
    with pytest.raises(InvalidArgument):
        parse_spin(0)


def test_manifold_ordering():
    m = SpinManifold(Fraction(5, 2))
    assert m.dim == 6
    assert [float(v) for v in m.m_values] == [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]


@pytest.mark.parametrize("S", SPINS)
def test_commutators_and_casimir(S):
    ops = spin_operators(S)
    s = float(parse_spin(S))
    comm = ops.x @ ops.y - ops.y @ ops.x
    assert np.allclose(comm, 1j * ops.z, atol=1e-10)
    casimir = ops.x @ ops.x + ops.y @ ops.y + ops.z @ ops.z
    assert np.allclose(casimir, s * (s + 1) * np.eye(ops.z.shape[0]), atol=1e-10)
    assert is_hermitian(ops.x) and is_hermitian(ops.y)


def test_fock_ladder():
    f = FockSpace(6)
    assert np.allclose(f.adag @ f.a - f.number, 0)
    v = f.adag @ f.basis(2)
    assert np.isclose(v[3], np.sqrt(3))


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.integers(0, 10_000))
def test_propagator_unitary(t, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = A + dag(A)
    U = propagator(H, t)
    assert np.allclose(U @ dag(U), np.eye(4), atol=1e-10)


def test_propagator_rejects_non_hermitian():
    with pytest.raises(InvalidArgument):
        propagator(np.array([[0, 1], [0, 0]]), 1.0)


def test_evolve_matches_propagator():
    H = spin_operators("1/2").x
    psi = np.array([1, 0], dtype=complex)
    out = evolve(H, np.pi, psi)
    assert np.isclose(abs(out[1]) ** 2, 1.0)


def _random_channel(rng, d=3, k=3):
    G = rng.normal(size=(k * d, d)) + 1j * rng.normal(size=(k * d, d))
    Q, _ = np.linalg.qr(G)
    return KrausChannel([Q[i * d : (i + 1) * d] for i in range(k)])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_channel_preserves_density_matrix(seed):
    rng = np.random.default_rng(seed)
    ch = _random_channel(rng)
    psi = rng.normal(size=3) + 1j * rng.normal(size=3)
    rho = ket_to_dm(psi / np.linalg.norm(psi))
    out = apply_channel(ch, rho)
    check_density_matrix(out)
    assert ch.completeness_defect < 1e-10


def test_superoperator_matches_kraus():
    rng = np.random.default_rng(1)
    ch = _random_channel(rng)
    rho = ket_to_dm(np.array([1, 1j, 0]) / np.sqrt(2))
    assert np.allclose((ch.superoperator() @ rho.ravel()).reshape(3, 3), ch(rho))


def test_trace_decreasing_allowed_increasing_rejected():
    ch = KrausChannel([0.5 * np.eye(2)])
    assert not ch.complete
    with pytest.raises(InvalidArgument):
        KrausChannel([1.5 * np.eye(2)])


def test_partial_trace_product():
    a = ket_to_dm(np.array([1, 0], dtype=complex))
    b = ket_to_dm(np.array([0, 1, 0], dtype=complex))
    joint = tensor(a, b)
    assert np.allclose(partial_trace(joint, [2, 3], 0), a)
    assert np.allclose(partial_trace(joint, [2, 3], 1), b)


def test_fidelity_and_distance():
    psi = np.array([1, 0], dtype=complex)
    rho = np.eye(2) / 2
    assert np.isclose(state_fidelity(psi, rho), 0.5)
    assert np.isclose(trace_distance(ket_to_dm(psi), rho), 0.5)
