"""Four-level dephasing code in a spin manifold.

The code lives on the sublevels ``{-3/2, -1/2, +1/2, +3/2}``:

    |0_L> = a|-3/2> + b|+1/2>        |0_E> = b|-3/2> - a|+1/2>
    |1_L> = b|-1/2> + a|+3/2>        |1_E> = a|-1/2> - b|+3/2>

with ``a^2 = e^{2 kt} / (3 + e^{2 kt})`` and ``b^2 = 3 / (3 + e^{2 kt})``,
``kt`` being the dimensionless dephasing strength the code is tilted for
(``kt = 0`` gives the amplitudes 1/2 and sqrt(3)/2).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import SpinManifold, dag, parse_spin, spin_operators
from .errors import InvalidArgument, UnsupportedManifold

KL_TOL = 1e-10

#: host sublevels of the two codeword pairs, low m first
CODE_PAIRS = ((Fraction(-3, 2), Fraction(1, 2)), (Fraction(-1, 2), Fraction(3, 2)))


@dataclass(frozen=True)
class CodeSpec:
    """Codewords and error words embedded in a host spin manifold.

    ``pairs[s]`` holds the two host sublevels spanned by ``|s_L>`` and
    ``|s_E>``; ``weights[s]`` is the squared amplitude of ``|s_L>`` on the
    higher of the two sublevels.
    """

    manifold: SpinManifold
    pairs: tuple
    weights: tuple
    kappa_t: float = 0.0
    zero_L: np.ndarray = field(repr=False, default=None)
    one_L: np.ndarray = field(repr=False, default=None)
    zero_E: np.ndarray = field(repr=False, default=None)
    one_E: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return self.manifold.dim

    @property
    def logical(self) -> tuple[np.ndarray, np.ndarray]:
        return self.zero_L, self.one_L

    @property
    def error(self) -> tuple[np.ndarray, np.ndarray]:
        return self.zero_E, self.one_E

    @property
    def basis(self) -> np.ndarray:
        """Columns ``[|0_L>, |1_L>, |0_E>, |1_E>]``."""
        return np.column_stack([self.zero_L, self.one_L, self.zero_E, self.one_E])

    @property
    def code_projector(self) -> np.ndarray:
        v = self.basis[:, :2]
        return v @ dag(v)

    @property
    def error_projector(self) -> np.ndarray:
        v = self.basis[:, 2:]
        return v @ dag(v)

    @property
    def levels(self) -> tuple:
        return tuple(m for pair in self.pairs for m in pair)

    def logical_state(self, alpha, beta) -> np.ndarray:
        return alpha * self.zero_L + beta * self.one_L

    def error_state(self, alpha, beta) -> np.ndarray:
        return alpha * self.zero_E + beta * self.one_E

    def plus(self, space: str = "L", sign: int = 1) -> np.ndarray:
        """``|+_L>``, ``|-_L>``, ``|+_E>`` or ``|-_E>``."""
        zero, one = self.logical if space == "L" else self.error
        return (zero + sign * one) / math.sqrt(2.0)

    @property
    def parity(self) -> np.ndarray:
        return parity_operator(self)


def _pair_states(manifold, pair, weight_hi):
    lo, hi = pair
    a, b = math.sqrt(1.0 - weight_hi), math.sqrt(weight_hi)
    logical = a * manifold.basis(lo) + b * manifold.basis(hi)
    error = b * manifold.basis(lo) - a * manifold.basis(hi)
    return logical, error


def code_from_pairs(manifold: SpinManifold, pairs, weights, kappa_t: float = 0.0) -> CodeSpec:
    """Build a CodeSpec from two disjoint sublevel pairs and weights on the higher level."""
    (l0, e0), (l1, e1) = (_pair_states(manifold, p, w) for p, w in zip(pairs, weights))
    return CodeSpec(
        manifold=manifold,
        pairs=tuple(tuple(Fraction(m) for m in p) for p in pairs),
        weights=tuple(float(w) for w in weights),
        kappa_t=float(kappa_t),
        zero_L=l0,
        one_L=l1,
        zero_E=e0,
        one_E=e1,
    )


def build_code(S="5/2", kappa_t: float = 0.0) -> CodeSpec:
    """The dephasing code tilted for Lindblad strength ``kappa_t``."""
    try:
        s = parse_spin(S)
    except InvalidArgument as exc:
        raise UnsupportedManifold(str(exc)) from exc
    if s.denominator != 2 or s < Fraction(3, 2):
        raise UnsupportedManifold(f"the four-level code needs a half-integer spin >= 3/2, got {s}")
    if kappa_t < 0:
        raise InvalidArgument("kappa_t must be non-negative")
    g = math.exp(2.0 * kappa_t)
    # weight of |0_L> on +1/2 and of |1_L> on +3/2
    w0 = 3.0 / (3.0 + g)
    w1 = g / (3.0 + g)
    return code_from_pairs(SpinManifold(s), CODE_PAIRS, (w0, w1), kappa_t)


@dataclass
class KLReport:
    alpha: np.ndarray
    max_violation: float
    passed: bool
    tol: float


def kl_verify(code: CodeSpec, errors: Sequence[np.ndarray], tol: float = KL_TOL) -> KLReport:
    """Check ``<s_L|E_l^dag E_k|s'_L> = alpha_lk delta_ss'`` for all pairs."""
    errors = [np.asarray(e, dtype=complex) for e in errors]
    if not errors:
        raise InvalidArgument("error set is empty")
    for e in errors:
        if e.shape != (code.dim, code.dim):
            raise InvalidArgument(f"error operator shape {e.shape} does not match host dimension {code.dim}")
    v = code.basis[:, :2]
    # blocks[l, k] = V^dag E_l^dag E_k V, a 2x2 matrix over codewords
    ev = np.stack([e @ v for e in errors])
    blocks = np.einsum("lia,kib->lkab", ev.conj(), ev)
    alpha = blocks[:, :, 0, 0]
    violation = max(
        np.max(np.abs(blocks[:, :, 1, 1] - alpha)),
        np.max(np.abs(blocks[:, :, 0, 1])),
        np.max(np.abs(blocks[:, :, 1, 0])),
    )
    return KLReport(alpha=alpha, max_violation=float(violation), passed=bool(violation <= tol), tol=tol)


def pseudo_spin_x(code: CodeSpec) -> np.ndarray:
    """Spin-3/2 ``S_x`` acting on the four code sublevels, zero elsewhere.

    The code sublevels, taken in ascending m, are identified with the spin-3/2
    levels ``-3/2 .. +3/2``.
    """
    levels = sorted(code.levels)
    idx = [code.manifold.index(m) for m in levels]
    sx = spin_operators(Fraction(3, 2)).x
    out = np.zeros((code.dim, code.dim), dtype=complex)
    out[np.ix_(idx, idx)] = sx
    return out


def parity_operator(code: CodeSpec) -> np.ndarray:
    """``Sx~^2 - 5/4`` on the code sublevels; +1 on code words, -1 on error words."""
    sx = pseudo_spin_x(code)
    support = np.zeros((code.dim, code.dim))
    for m in code.levels:
        i = code.manifold.index(m)
        support[i, i] = 1.0
    return sx @ sx - 1.25 * support


def _moment_segment(pair):
    # (first, second) S_z moments of |lo> + weight*(|hi> - |lo>) as affine functions of weight
    lo, hi = (float(m) for m in pair)
    return np.array([lo, lo * lo]), np.array([hi - lo, hi * hi - lo * lo])


def code_search(S, errors: Sequence[np.ndarray] | None = None, tol: float = KL_TOL) -> list[CodeSpec]:
    """Enumerate two-level real-amplitude codes correcting ``{I, S_z}``.

    Each codeword is a real superposition of two sublevels with both
    amplitudes nonzero, the two codewords on disjoint sublevels. For
    ``{I, S_z}`` the Knill-Laflamme conditions reduce to equal first and
    second ``S_z`` moments, which is a 2x2 linear system per choice of
    sublevel pairs. Candidates are then checked with ``kl_verify`` against
    ``errors`` (default ``{I, S_z}``). Results are ordered
    lexicographically by sublevel indices.
    """
    manifold = SpinManifold(S)
    sz = spin_operators(manifold).z
    if errors is None:
        errors = [np.eye(manifold.dim), sz]
    m_vals = [Fraction(int(2 * m), 2) for m in manifold.m_values]
    found = []
    for quad in itertools.combinations(range(manifold.dim), 4):
        for first in itertools.combinations(quad, 2):
            if quad[0] not in first:
                continue  # fixes the codeword order: the lowest index belongs to |0_L>
            second = tuple(i for i in quad if i not in first)
            p0 = (m_vals[first[0]], m_vals[first[1]])
            p1 = (m_vals[second[0]], m_vals[second[1]])
            base0, slope0 = _moment_segment(p0)
            base1, slope1 = _moment_segment(p1)
            mat = np.column_stack([slope0, -slope1])
            if abs(np.linalg.det(mat)) < 1e-12:
                continue  # parallel segments: no isolated solution in this ansatz
            w0, w1 = np.linalg.solve(mat, base1 - base0)
            if not (tol < w0 < 1 - tol and tol < w1 < 1 - tol):
                continue
            code = code_from_pairs(manifold, (p0, p1), (w0, w1))
            if kl_verify(code, errors, tol).passed:
                found.append(code)
    return found


def same_code(a: CodeSpec, b: CodeSpec, tol: float = 1e-10) -> bool:
    """Equal up to codeword relabeling and per-codeword sign."""
    if a.dim != b.dim:
        return False

    def match(u, v):
        return abs(abs(np.vdot(u, v)) - 1.0) < tol

    straight = match(a.zero_L, b.zero_L) and match(a.one_L, b.one_L)
    swapped = match(a.zero_L, b.one_L) and match(a.one_L, b.zero_L)
    return straight or swapped
