"""Dephasing channels, quasi-static magnetic noise and instrument imperfections."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import KrausChannel, dag, propagator
from .constants import BOHR_MAGNETON_HZ_PER_T, G_D52, TWO_PI
from .errors import InvalidArgument, TruncationTooSmall

KRAUS_DEFECT_LIMIT = 1e-6
THERMAL_TAIL_LIMIT = 1e-8
GH_ORDER = 41


@dataclass(frozen=True)
class DephasingParams:
    rate: float
    duration: float
    l_max: int = 8

    def __post_init__(self):
        if self.rate < 0 or self.duration < 0:
            raise InvalidArgument("dephasing rate and duration must be non-negative")
        if self.l_max < 1:
            raise InvalidArgument("l_max must be >= 1")

    @property
    def kappa_t(self) -> float:
        return self.rate * self.duration


def _diag_or_none(op):
    return np.diag(op) if np.count_nonzero(op - np.diag(np.diag(op))) == 0 else None


def _fn_of_hermitian(op, fn):
    w, v = np.linalg.eigh(0.5 * (op + dag(op)))
    return (v * fn(w)) @ dag(v)


def lindblad_kraus(params: DephasingParams, S_z: np.ndarray) -> KrausChannel:
    """Jump-number Kraus expansion of the ``S_z`` dephasing Lindbladian.

    ``E_l = sqrt((kt)^l / l!) exp(-kt S_z^2 / 2) S_z^l`` for ``l = 0..l_max``.
    """
    kt = params.kappa_t
    S_z = np.asarray(S_z, dtype=complex)
    if kt == 0.0:
        return KrausChannel([np.eye(S_z.shape[0], dtype=complex)])
    damp = _fn_of_hermitian(S_z @ S_z, lambda w: np.exp(-0.5 * kt * w))
    ops = []
    power = np.eye(S_z.shape[0], dtype=complex)
    for l in range(params.l_max + 1):
        ops.append(math.sqrt(kt**l / math.factorial(l)) * damp @ power)
        power = power @ S_z
    ch = KrausChannel(ops, tol=KRAUS_DEFECT_LIMIT)
    if ch.completeness_defect > KRAUS_DEFECT_LIMIT:
        raise TruncationTooSmall(
            f"Kraus truncation l_max={params.l_max} leaves completeness defect {ch.completeness_defect:.3g}"
        )
    return ch


def required_kraus_order(kappa_t: float, S_z: np.ndarray, tol: float = 1e-10) -> int:
    """Smallest ``l_max`` whose completeness defect is below ``tol``."""
    x = kappa_t * float(np.max(np.abs(np.linalg.eigvalsh(S_z)))) ** 2
    term, total, l = 1.0, 1.0, 0
    while 1.0 - math.exp(-x) * total > tol:
        l += 1
        term *= x / l
        total += term
    return max(l, 1)


def lindblad_rhs(rho: np.ndarray, kappa: float, S_z: np.ndarray) -> np.ndarray:
    """``kappa (S_z rho S_z - S_z^2 rho / 2 - rho S_z^2 / 2)``."""
    s2 = S_z @ S_z
    return kappa * (S_z @ rho @ S_z - 0.5 * (s2 @ rho + rho @ s2))


def coherent_rotation(theta: float, S_z: np.ndarray) -> np.ndarray:
    """``exp(-i theta S_z)``."""
    S_z = np.asarray(S_z, dtype=complex)
    d = _diag_or_none(S_z)
    if d is not None:
        return np.diag(np.exp(-1j * theta * d))
    return propagator(S_z, theta)


def averaged_rotation_channel(sigma: float, S_z: np.ndarray, order: int = GH_ORDER) -> KrausChannel:
    """Gaussian average of ``U(theta) rho U(theta)^dag`` as a Kraus channel.

    Gauss-Hermite nodes ``theta_k`` with weights ``w_k`` give Kraus operators
    ``sqrt(w_k) U(theta_k)``.
    """
    if sigma < 0:
        raise InvalidArgument("sigma must be non-negative")
    if order < 21:
        raise InvalidArgument("quadrature order must be >= 21")
    S_z = np.asarray(S_z, dtype=complex)
    if sigma == 0.0:
        return KrausChannel([np.eye(S_z.shape[0], dtype=complex)])
    x, w = np.polynomial.hermite_e.hermegauss(order)
    w = w / w.sum()
    return KrausChannel([math.sqrt(wk) * coherent_rotation(sigma * xk, S_z) for xk, wk in zip(x, w)])


def gaussian_phase_nodes(sigma: float, order: int = GH_ORDER):
    """Nodes and normalized weights for averaging over ``theta ~ N(0, sigma^2)``."""
    x, w = np.polynomial.hermite_e.hermegauss(order)
    return sigma * x, w / w.sum()


def field_to_detuning(B: float, delta_m: float = 1.0, g_factor: float = G_D52) -> float:
    """Zeeman angular-frequency shift of ``delta_m`` quanta in field ``B`` (T)."""
    return TWO_PI * g_factor * BOHR_MAGNETON_HZ_PER_T * B * delta_m


@dataclass(frozen=True)
class NoiseSchedule:
    """Piecewise-constant Gaussian field noise.

    ``sensitivity`` converts tesla to rad/s per unit of m; ``regime`` is
    ``"quasi-static"`` (phase variance grows as t^2 within a segment) or
    ``"random-walk"`` (each segment short compared to the evolution, so the
    phase variance grows as t).
    """

    field_sigma: float
    update_interval: float
    duration: float
    sensitivity: float = field(default_factory=lambda: field_to_detuning(1.0, 1.0))
    regime: str = "quasi-static"

    def __post_init__(self):
        if self.update_interval <= 0:
            raise InvalidArgument("update interval must be positive")
        if self.field_sigma < 0 or self.duration < 0:
            raise InvalidArgument("field sigma and duration must be non-negative")
        if self.regime not in ("quasi-static", "random-walk"):
            raise InvalidArgument(f"unknown noise regime {self.regime!r}")

    @classmethod
    def from_g_factor(cls, field_sigma, update_interval, duration, g_factor=G_D52, **kw):
        return cls(field_sigma, update_interval, duration, field_to_detuning(1.0, 1.0, g_factor), **kw)

    @property
    def detuning_sigma(self) -> float:
        return self.field_sigma * self.sensitivity

    @property
    def n_segments(self) -> int:
        if self.duration == 0:
            return 0
        return int(math.ceil(self.duration / self.update_interval - 1e-12))

    def phase_sigma(self, t: float) -> float:
        """Standard deviation of the phase accumulated over ``[0, t]``."""
        if self.regime == "quasi-static" and t <= self.update_interval:
            return self.detuning_sigma * t
        full, rest = divmod(t, self.update_interval)
        return self.detuning_sigma * math.sqrt(full * self.update_interval**2 + rest**2)


@dataclass(frozen=True)
class NoiseTrajectory:
    """Ordered (duration s, detuning rad/s) segments."""

    segments: tuple

    def __post_init__(self):
        if any(d <= 0 for d, _ in self.segments):
            raise InvalidArgument("segment durations must be positive")

    @property
    def duration(self) -> float:
        return float(sum(d for d, _ in self.segments))

    @classmethod
    def constant(cls, detuning: float, duration: float) -> "NoiseTrajectory":
        return cls(((float(duration), float(detuning)),)) if duration > 0 else cls(())

    def detuning_at(self, t: float) -> float:
        edge = 0.0
        for d, delta in self.segments:
            edge += d
            if t < edge:
                return delta
        return self.segments[-1][1] if self.segments else 0.0

    def phase(self, t0: float, t1: float) -> float:
        """Accumulated phase ``int_{t0}^{t1} delta(t) dt`` (rad per unit m)."""
        total, edge = 0.0, 0.0
        for d, delta in self.segments:
            lo, hi = max(t0, edge), min(t1, edge + d)
            if hi > lo:
                total += delta * (hi - lo)
            edge += d
        if t1 > edge and self.segments:
            total += self.segments[-1][1] * (t1 - max(t0, edge))
        return total


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trajectory_seeds(master_seed: int, count: int) -> list[np.random.SeedSequence]:
    """Independent per-trajectory streams derived from ``(master_seed, index)``."""
    return [np.random.SeedSequence([int(master_seed), i]) for i in range(count)]


def sample_trajectory(schedule: NoiseSchedule, seed) -> NoiseTrajectory:
    rng = as_generator(seed)
    n = schedule.n_segments
    fields = rng.normal(0.0, schedule.field_sigma, size=n) if schedule.field_sigma > 0 else np.zeros(n)
    segments = []
    remaining = schedule.duration
    for b in fields:
        d = min(schedule.update_interval, remaining)
        segments.append((d, float(b * schedule.sensitivity)))
        remaining -= d
    if segments:
        # absorb rounding so the total is exact
        d, delta = segments[-1]
        segments[-1] = (schedule.duration - sum(s[0] for s in segments[:-1]), delta)
    return NoiseTrajectory(tuple(segments))


def thermal_populations(nbar: float, N: int) -> np.ndarray:
    """Truncated, renormalized geometric distribution ``nbar^n / (1+nbar)^(n+1)``."""
    if nbar < 0:
        raise InvalidArgument("nbar must be non-negative")
    if nbar == 0:
        p = np.zeros(N)
        p[0] = 1.0
        return p
    q = nbar / (1.0 + nbar)
    tail = q**N
    if tail > THERMAL_TAIL_LIMIT:
        raise TruncationTooSmall(f"Fock truncation N={N} drops {tail:.3g} of the thermal population")
    p = (1.0 - q) * q ** np.arange(N)
    return p / p.sum()


def thermal_phonon_state(nbar: float, N: int) -> np.ndarray:
    return np.diag(thermal_populations(nbar, N)).astype(complex)


@dataclass(frozen=True)
class InstrumentImperfections:
    """Per-shot imperfections of one correction cycle.

    ``mode_drift_pp`` is a peak-to-peak spread of the motional frequency
    (rad/s), realized as a Gaussian static offset with sigma ``pp/4``;
    ``intensity_rel`` is the sigma of the common relative Rabi-frequency
    error; ``stark_phase`` is the residual uncompensated logical phase per
    cycle (rad); ``stark_phase_error`` the extra miscalibration seen by
    population that was transferred out of the error space.
    """

    nbar: float = 0.0
    heating_rate: float = 0.0
    mode_drift_pp: float = 0.0
    intensity_rel: float = 0.0
    stark_phase: float = 0.0
    stark_phase_error: float = 0.0

    def __post_init__(self):
        for name in ("nbar", "heating_rate", "mode_drift_pp", "intensity_rel", "stark_phase", "stark_phase_error"):
            if getattr(self, name) < 0:
                raise InvalidArgument(f"{name} must be non-negative")

    @property
    def mode_drift_sigma(self) -> float:
        return self.mode_drift_pp / 4.0

    @property
    def any(self) -> bool:
        return any(
            getattr(self, n) > 0
            for n in ("nbar", "heating_rate", "mode_drift_pp", "intensity_rel", "stark_phase", "stark_phase_error")
        )

    def sample_offsets(self, rng) -> tuple[float, float]:
        """Per-shot (mode-frequency offset rad/s, relative intensity error)."""
        rng = as_generator(rng)
        drift = rng.normal(0.0, self.mode_drift_sigma) if self.mode_drift_pp > 0 else 0.0
        inten = rng.normal(0.0, self.intensity_rel) if self.intensity_rel > 0 else 0.0
        return float(drift), float(inten)
