"""Qubit state and process tomography with leakage accounting.

Measurements act on the decoded qubit: each basis X, Y, Z has outcomes
``+``, ``-`` and ``leak`` (population found outside the code space). The
qubit block handed to this module may therefore have trace below one; the
deficit is the leakage probability.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import dag
from .errors import InvalidArgument
from .noise import as_generator

log = logging.getLogger(__name__)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)
PAULI_LABELS = ("I", "X", "Y", "Z")
BASES = ("X", "Y", "Z")
_BASIS_OP = {"X": X, "Y": Y, "Z": Z}

#: process-tomography inputs |0>, |1>, |+>, |+i>
INPUT_STATES = (
    np.array([1, 0], dtype=complex),
    np.array([0, 1], dtype=complex),
    np.array([1, 1], dtype=complex) / np.sqrt(2),
    np.array([1, 1j], dtype=complex) / np.sqrt(2),
)


@dataclass(frozen=True)
class ShotRecord:
    basis: str
    counts: tuple  # (+, -, leak)
    shots: int | None  # None marks exact (infinite-shot) probabilities

    def __post_init__(self):
        if self.basis not in BASES:
            raise InvalidArgument(f"unknown basis {self.basis!r}")
        if self.shots is not None and sum(self.counts) != self.shots:
            raise InvalidArgument("counts do not sum to the shot total")

    @property
    def frequencies(self) -> np.ndarray:
        c = np.asarray(self.counts, dtype=float)
        return c if self.shots is None else c / self.shots


def outcome_probabilities(block: np.ndarray, basis: str) -> np.ndarray:
    """``(p+, p-, p_leak)`` for a possibly sub-normalized qubit block."""
    block = np.asarray(block, dtype=complex)
    op = _BASIS_OP[basis]
    tr = float(np.real(np.trace(block)))
    expv = float(np.real(np.trace(op @ block)))
    p = np.array([(tr + expv) / 2, (tr - expv) / 2, 1.0 - tr])
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def simulate_counts(block: np.ndarray, basis: str, shots: int | None, seed=None) -> ShotRecord:
    """Multinomial readout; ``shots=None`` stores the exact probabilities."""
    if basis not in BASES:
        raise InvalidArgument(f"unknown basis {basis!r}")
    p = outcome_probabilities(block, basis)
    if shots is None:
        return ShotRecord(basis, tuple(float(x) for x in p), None)
    if shots < 1:
        raise InvalidArgument("shots must be >= 1")
    counts = as_generator(seed).multinomial(shots, p)
    return ShotRecord(basis, tuple(int(c) for c in counts), int(shots))


def project_simplex(values: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection of a real vector onto ``{x >= 0, sum x = total}``."""
    v = np.asarray(values, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    k = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def project_psd(mat: np.ndarray, trace: float = 1.0) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix with the given trace."""
    mat = 0.5 * (mat + dag(mat))
    w, v = np.linalg.eigh(mat)
    return (v * project_simplex(w, trace)) @ dag(v)


def state_tomography(records) -> np.ndarray:
    """Density matrix from X, Y, Z records with leakage admixture.

    The Bloch vector comes from the non-leaked counts of each basis and is
    projected onto the state space; the mean leaked fraction ``w`` then
    mixes in the maximally mixed state: ``(1-w) rho + w I/2``.
    """
    by_basis = {r.basis: r for r in records}
    missing = [b for b in BASES if b not in by_basis]
    if missing:
        raise InvalidArgument(f"missing measurement bases: {missing}")
    bloch, leak = [], []
    for b in BASES:
        f = by_basis[b].frequencies
        kept = f[0] + f[1]
        bloch.append((f[0] - f[1]) / kept if kept > 0 else 0.0)
        leak.append(f[2])
    rho = 0.5 * (I2 + bloch[0] * X + bloch[1] * Y + bloch[2] * Z)
    rho = project_psd(rho)
    w = float(np.mean(leak))
    return (1.0 - w) * rho + w * I2 / 2


def _pauli_transfer_basis() -> np.ndarray:
    # column (m, n) holds vec(P_m E P_n^dag) for E running over matrix units
    cols = []
    for Pm in PAULIS:
        for Pn in PAULIS:
            cols.append(np.concatenate([(Pm @ E @ dag(Pn)).ravel() for E in _matrix_units()]))
    return np.column_stack(cols)


def _matrix_units():
    out = []
    for j in range(2):
        for k in range(2):
            E = np.zeros((2, 2), dtype=complex)
            E[j, k] = 1.0
            out.append(E)
    return out


_BETA = _pauli_transfer_basis()


def chi_from_outputs(outputs) -> np.ndarray:
    """Linear inversion from the outputs for ``INPUT_STATES``.

    The channel's action on the matrix units follows from linearity
    (``|0><1| = |+><+| + i|+i><+i| - (1+i)/2 (|0><0| + |1><1|)``); ``chi``
    solves ``E(rho) = sum_mn chi_mn P_m rho P_n^dag`` with Paulis
    ordered I, X, Y, Z.
    """
    r0, r1, rp, ry = (np.asarray(o, dtype=complex) for o in outputs)
    e01 = rp + 1j * ry - 0.5 * (1 + 1j) * (r0 + r1)
    e10 = rp - 1j * ry - 0.5 * (1 - 1j) * (r0 + r1)
    rhs = np.concatenate([r0.ravel(), e01.ravel(), e10.ravel(), r1.ravel()])
    sol = np.linalg.solve(_BETA, rhs)
    chi = sol.reshape(4, 4)
    return 0.5 * (chi + dag(chi))


@dataclass
class ChiMatrix:
    matrix: np.ndarray
    projected: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise InvalidArgument("chi matrix must be 4x4")
        self.matrix = m

    @classmethod
    def identity(cls) -> "ChiMatrix":
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = 1.0
        return cls(m)

    def fidelity(self, other: "ChiMatrix | None" = None) -> float:
        return process_fidelity(self, other if other is not None else ChiMatrix.identity())

    def to_json(self) -> dict:
        return {"re": np.real(self.matrix).tolist(), "im": np.imag(self.matrix).tolist(), "basis": list(PAULI_LABELS)}


def process_tomography(
    evaluator: Callable[[np.ndarray], np.ndarray],
    shots: int | None = None,
    seed=None,
    project: bool = True,
) -> ChiMatrix:
    """Four-input process tomography of ``evaluator``.

    ``evaluator`` maps an input qubit density matrix to the decoded output
    block (trace below one signals leakage). Each output is reconstructed
    with ``state_tomography`` from simulated X, Y, Z records, ``chi`` follows
    by linear inversion and, with ``project``, is projected onto the
    trace-one PSD cone.
    """
    rng = as_generator(seed) if shots is not None else None
    outputs = []
    for psi in INPUT_STATES:
        block = evaluator(np.outer(psi, psi.conj()))
        records = [simulate_counts(block, b, shots, rng) for b in BASES]
        outputs.append(state_tomography(records))
    chi = chi_from_outputs(outputs)
    if project:
        return ChiMatrix(project_psd(chi), projected=True)
    return ChiMatrix(chi)


def process_fidelity(chi_m: ChiMatrix, chi_i: ChiMatrix) -> float:
    """``Re Tr(chi_M chi_I)`` clamped to ``[0, 1]``."""
    f = float(np.real(np.trace(chi_m.matrix @ chi_i.matrix)))
    if not 0.0 <= f <= 1.0:
        log.info("process fidelity %.3g clamped to [0, 1]", f)
    return min(max(f, 0.0), 1.0)


def average_fidelity(f_chi: float, d: int = 2) -> float:
    return (d * f_chi + 1.0) / (d + 1.0)


def chi_fidelity_from_average(f_avg: float, d: int = 2) -> float:
    return ((d + 1.0) * f_avg - 1.0) / d
