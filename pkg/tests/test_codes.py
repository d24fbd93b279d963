import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_aqec.algebra import spin_operators
from qudit_aqec.codes import build_code, code_search, kl_verify, parity_operator, same_code
from qudit_aqec.errors import InvalidArgument, UnsupportedManifold
from qudit_aqec.noise import DephasingParams, lindblad_kraus, required_kraus_order

S3 = math.sqrt(3) / 2


def _amp(code, vec, m):
    return float(np.real(vec[code.manifold.index(m)]))


def test_codeword_amplitudes():
    c = build_code("5/2")
    assert _amp(c, c.zero_L, -1.5) == pytest.approx(0.5, abs=1e-12)
    assert _amp(c, c.zero_L, 0.5) == pytest.approx(S3, abs=1e-12)
    assert _amp(c, c.zero_E, -1.5) == pytest.approx(S3, abs=1e-12)
    assert _amp(c, c.zero_E, 0.5) == pytest.approx(-0.5, abs=1e-12)
    assert _amp(c, c.one_L, -0.5) == pytest.approx(S3, abs=1e-12)
    assert _amp(c, c.one_L, 1.5) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("S", ["3/2", "5/2", "7/2", "9/2"])
@pytest.mark.parametrize("kt", [0.0, 0.05, 0.3])
def test_basis_orthonormal_and_projectors(S, kt):
    c = build_code(S, kt)
    assert np.allclose(c.basis.conj().T @ c.basis, np.eye(4), atol=1e-12)
    assert np.allclose(c.code_projector @ c.error_projector, 0, atol=1e-12)


def test_error_words_are_sz_images():
    c = build_code("5/2")
    sz = spin_operators(c.manifold).z
    assert np.allclose(sz @ c.zero_L, -S3 * c.zero_E, atol=1e-12)
    assert np.allclose(sz @ c.one_L, -S3 * c.one_E, atol=1e-12)


def test_kl_first_order():
    c = build_code("5/2")
    sz = spin_operators(c.manifold).z
    rep = kl_verify(c, [np.eye(6), sz], tol=1e-12)
    assert rep.passed
    assert np.allclose(rep.alpha, [[1, 0], [0, 0.75]], atol=1e-12)
    assert not kl_verify(c, [np.eye(6), sz, sz @ sz]).passed
    assert kl_verify(c, [np.eye(6)]).alpha.shape == (1, 1)


def test_kl_dimension_mismatch():
    with pytest.raises(InvalidArgument):
        kl_verify(build_code(), [np.eye(4)])


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-3, 0.5))
def test_tilted_code_lindblad_kl(kt):
    c = build_code("5/2", kt)
    sz = spin_operators(c.manifold).z
    ops = lindblad_kraus(DephasingParams(kt, 1.0, l_max=required_kraus_order(kt, sz)), sz).ops[:2]
    assert kl_verify(c, ops, tol=1e-10).passed


def test_tilted_limit_matches_untilted():
    assert np.allclose(build_code("5/2", 1e-14).zero_L, build_code("5/2").zero_L, atol=1e-12)


@pytest.mark.parametrize("S", ["1", "2", "1/2"])
def test_unsupported_manifold(S):
    with pytest.raises(UnsupportedManifold):
        build_code(S)


def test_parity():
    c = build_code("5/2")
    P = parity_operator(c)
    for v in (c.zero_L, c.one_L):
        assert np.vdot(v, P @ v).real == pytest.approx(1.0, abs=1e-12)
    for v in (c.zero_E, c.one_E):
        assert np.vdot(v, P @ v).real == pytest.approx(-1.0, abs=1e-12)
    block = c.basis.conj().T @ P @ c.basis
    assert np.allclose(np.sort(np.linalg.eigvalsh(block)), [-1, -1, 1, 1], atol=1e-12)


def test_code_search():
    assert code_search("3/2")
    assert code_search("1") == []
    found = code_search("5/2")
    assert any(same_code(f, build_code("5/2")) for f in found)
    for f in found:
        assert np.allclose(f.basis.conj().T @ f.basis, np.eye(4), atol=1e-12)
