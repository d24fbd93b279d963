"""Dense linear algebra for spin-S levels and a truncated phonon mode.

Operators and states are plain complex numpy arrays. Where the subsystem
structure matters (tensor products, partial traces) the subsystem dimension
list is passed explicitly as ``dims``. Spin levels are ordered with m
ascending, index ``i`` <-> ``m = -S + i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidArgument

HERMITIAN_TOL = 1e-10


def parse_spin(value) -> Fraction:
    """Parse a spin quantum number given as ``"5/2"``, 2.5, Fraction, ...

    Raises InvalidArgument unless 2S is a positive integer.
    """
    try:
        s = Fraction(str(value)) if isinstance(value, str) else Fraction(value).limit_denominator(1000)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidArgument(f"cannot parse spin value {value!r}") from exc
    if s <= 0 or (2 * s).denominator != 1:
        raise InvalidArgument(f"spin must be a positive half-integer or integer, got {value!r}")
    return s


@dataclass(frozen=True)
class SpinManifold:
    """A spin-S manifold of ``2S+1`` Zeeman sublevels."""

    S: Fraction

    def __post_init__(self):
        object.__setattr__(self, "S", parse_spin(self.S))

    @property
    def dim(self) -> int:
        return int(2 * self.S + 1)

    @property
    def m_values(self) -> np.ndarray:
        return -float(self.S) + np.arange(self.dim)

    @property
    def is_half_integer(self) -> bool:
        return self.S.denominator == 2

    def index(self, m) -> int:
        """Level index of sublevel ``m``."""
        i = Fraction(m).limit_denominator(1000) + self.S
        if i.denominator != 1 or not 0 <= i < self.dim:
            raise InvalidArgument(f"m={m} is not a sublevel of spin {self.S}")
        return int(i)

    def basis(self, m) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(m)] = 1.0
        return v


class SpinOperators(NamedTuple):
    z: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    x: np.ndarray
    y: np.ndarray


def spin_operators(manifold: SpinManifold | Fraction | str | float) -> SpinOperators:
    """Angular momentum matrices for a spin manifold (units of hbar)."""
    if not isinstance(manifold, SpinManifold):
        manifold = SpinManifold(manifold)
    s = float(manifold.S)
    m = manifold.m_values
    sz = np.diag(m).astype(complex)
    # <m+1|S+|m> = sqrt(S(S+1) - m(m+1))
    sp = np.diag(np.sqrt(s * (s + 1) - m[:-1] * (m[:-1] + 1)), k=-1).astype(complex)
    sm = sp.conj().T
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    return SpinOperators(sz, sp, sm, sx, sy)


@dataclass(frozen=True)
class FockSpace:
    """Phonon mode truncated to ``N`` Fock levels."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise InvalidArgument(f"Fock truncation must be an integer >= 2, got {self.N}")

    @property
    def a(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.N)), k=1).astype(complex)

    @property
    def adag(self) -> np.ndarray:
        return self.a.conj().T

    @property
    def number(self) -> np.ndarray:
        return np.diag(np.arange(self.N)).astype(complex)

    def basis(self, n: int) -> np.ndarray:
        v = np.zeros(self.N, dtype=complex)
        v[n] = 1.0
        return v


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of operators or state vectors, left factor outermost."""
    if not ops:
        raise InvalidArgument("tensor() needs at least one factor")
    return reduce(np.kron, ops)


def dag(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def is_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(op - dag(op)), initial=0.0) <= tol)


def check_state_vector(psi, tol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise InvalidArgument("state vector must be one-dimensional")
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise InvalidArgument(f"state vector norm {np.linalg.norm(psi)} != 1")
    return psi


def check_density_matrix(rho, tol: float = 1e-10) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return the array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidArgument("density matrix must be square")
    if not is_hermitian(rho, tol):
        raise InvalidArgument("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise InvalidArgument(f"density matrix trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(0.5 * (rho + dag(rho)))[0] < -tol:
        raise InvalidArgument("density matrix is not positive semidefinite")
    return rho


def propagator(H: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` for Hermitian ``H`` via eigendecomposition."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidArgument("Hamiltonian must be a square matrix")
    scale = max(1.0, float(np.max(np.abs(H), initial=0.0)))
    if not is_hermitian(H, HERMITIAN_TOL * scale):
        raise InvalidArgument("Hamiltonian is not Hermitian")
    w, v = np.linalg.eigh(0.5 * (H + dag(H)))
    return (v * np.exp(-1j * w * t)) @ dag(v)


def evolve(H: np.ndarray, t: float, state: np.ndarray) -> np.ndarray:
    """Evolve a ket (1-D) or density matrix (2-D) under ``H`` for time ``t``."""
    U = propagator(H, t)
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return U @ state
    return U @ state @ dag(U)


class KrausChannel:
    """A trace-non-increasing map ``rho -> sum_i K_i rho K_i^dag``.

    Construction checks ``sum K^dag K <= I`` within ``tol``; ``complete`` is
    set when the sum equals the identity within ``tol``.
    """

    def __init__(self, ops: Sequence[np.ndarray], tol: float = 1e-10):
        ops = [np.asarray(k, dtype=complex) for k in ops]
        if not ops:
            raise InvalidArgument("a Kraus channel needs at least one operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise InvalidArgument("Kraus operators must share one 2-D shape")
        self.ops = tuple(ops)
        self.tol = tol
        gram = self.gram()
        ev = np.linalg.eigvalsh(0.5 * (gram + dag(gram)))
        if ev[-1] > 1.0 + tol:
            raise InvalidArgument(f"Kraus set is trace-increasing (max eigenvalue {ev[-1]:.3g})")
        self.completeness_defect = float(np.max(np.abs(gram - np.eye(shape[1]))))
        self.complete = self.completeness_defect <= tol

    @property
    def dim_in(self) -> int:
        return self.ops[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.ops[0].shape[0]

    def gram(self) -> np.ndarray:
        return sum(dag(k) @ k for k in self.ops)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_channel(self, rho)

    def __len__(self):
        return len(self.ops)

    def then(self, other: "KrausChannel") -> "KrausChannel":
        """Composition: apply ``self`` first, then ``other``."""
        return KrausChannel([b @ a for a in self.ops for b in other.ops], tol=max(self.tol, other.tol))

    def superoperator(self) -> np.ndarray:
        """Row-stacked superoperator ``S`` with ``vec(K rho K^dag) = S vec(rho)``."""
        return sum(np.kron(k, k.conj()) for k in self.ops)

    @classmethod
    def unitary(cls, U: np.ndarray) -> "KrausChannel":
        return cls([U])

    @classmethod
    def identity(cls, dim: int) -> "KrausChannel":
        return cls([np.eye(dim, dtype=complex)])


def apply_channel(ch: KrausChannel, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise InvalidArgument(f"state shape {rho.shape} does not match channel input dimension {ch.dim_in}")
    return sum(k @ rho @ dag(k) for k in ch.ops)


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep) -> np.ndarray:
    """Reduced density matrix on subsystem(s) ``keep`` (int or sequence)."""
    dims = [int(d) for d in dims]
    rho = np.asarray(rho, dtype=complex)
    n = len(dims)
    keep_list = [keep] if np.isscalar(keep) else list(keep)
    if not keep_list or any(not isinstance(k, (int, np.integer)) or not 0 <= k < n for k in keep_list):
        raise InvalidArgument(f"invalid subsystem index {keep!r} for {n} subsystems")
    if rho.shape != (int(np.prod(dims)),) * 2:
        raise InvalidArgument(f"state shape {rho.shape} does not match dims {dims}")
    keep_list = sorted(set(int(k) for k in keep_list))
    t = rho.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in range(n):
        if i not in keep_list:
            col[i] = row[i]
    out = "".join(row[i] for i in keep_list) + "".join(col[i] for i in keep_list)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = int(np.prod([dims[k] for k in keep_list]))
    return reduced.reshape(d, d)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    diff = np.asarray(rho) - np.asarray(sigma)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + dag(diff))))))


def state_fidelity(psi: np.ndarray, rho: np.ndarray) -> float:
    """``<psi|rho|psi>`` for a pure reference state (``rho`` may be a ket)."""
    psi = np.asarray(psi, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        return float(abs(np.vdot(psi, rho)) ** 2)
    return float(np.real(np.vdot(psi, rho @ psi)))


def operator_norm(op: np.ndarray) -> float:
    return float(np.linalg.norm(op, 2))
