"""Multi-tone Raman entropy-conversion pulse beyond the effective model.

Internal levels are ordered ``[0_g, 1_g, 0_L, 1_L, 0_E, 1_E]`` and tensored
with one truncated phonon mode (internal index outermost). In the frame
rotating with each tone (level ``a_b`` rotated at its tone detuning
``w_ab``) the Lamb-Dicke Hamiltonian to first order in ``eta`` is
time-independent apart from the intensity envelope ``s(t)``:

    H(t) = w_m a^dag a - sum_a d_a |a_g><a_g| - sum_ab w_ab |a_b><a_b|
           + s(t) sum_ab (W_ab / 2) [1 + i eta (a + a^dag)] |a_b><a_g| + h.c.

Each coupling ``|a_b><a_g|`` to a codeword (a superposition of two Zeeman
sublevels) is realized in the laboratory by a pair of m-resolved tones
sharing one detuning, hence eight tones in total.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, curve_fit

from .algebra import FockSpace, dag
from .errors import IntegrationFailure, InvalidArgument

LEVELS = ("0_g", "1_g", "0_L", "1_L", "0_E", "1_E")
N_LEVELS = len(LEVELS)
DISPERSIVE_LIMIT = 1.0 / 3.0


def level_index(label: str) -> int:
    return LEVELS.index(label)


def _ket(label: str, fock: int, n: int = 0) -> np.ndarray:
    v = np.zeros(N_LEVELS * fock, dtype=complex)
    v[level_index(label) * fock + n] = 1.0
    return v


@dataclass(frozen=True)
class PulseParams:
    """Raman-pulse parameters (angular frequencies in rad/s, times in s).

    ``rabi`` and ``tone`` map ``"0L", "0E", "1L", "1E"`` to the tone Rabi
    frequencies ``W_ab`` and tone detunings ``w_ab``. ``extra_stark`` is a
    lumped light shift of the code levels from off-resonant levels outside
    the model, scaled by the intensity envelope.
    """

    omega_m: float
    eta: float
    delta: tuple
    rabi: dict
    tone: dict
    ramp: float
    duration: float
    extra_stark: float = 0.0
    fock: int = 3

    def __post_init__(self):
        if self.omega_m <= 0:
            raise InvalidArgument("mode frequency must be positive")
        if not 0 <= self.eta < 1:
            raise InvalidArgument("Lamb-Dicke parameter must lie in [0, 1)")
        if self.duration <= 0 or self.ramp < 0 or self.ramp > self.duration / 2:
            raise InvalidArgument("need 0 <= ramp <= duration / 2 and duration > 0")
        if set(self.rabi) != {"0L", "0E", "1L", "1E"} or set(self.tone) != set(self.rabi):
            raise InvalidArgument("rabi and tone need keys 0L, 0E, 1L, 1E")

    def with_duration(self, duration: float) -> "PulseParams":
        return replace(self, duration=duration)

    def scaled(self, intensity: float = 0.0, mode_shift: float = 0.0) -> "PulseParams":
        """Per-shot copy: all tone Rabi frequencies times ``1+intensity``, ``w_m`` shifted."""
        k = 1.0 + intensity
        return replace(self, rabi={key: k * v for key, v in self.rabi.items()}, omega_m=self.omega_m + mode_shift)

    @property
    def area_time(self) -> float:
        """Duration-weighted integral of ``s(t)^2`` (effective-coupling envelope)."""
        return self.duration - 1.25 * self.ramp

    @classmethod
    def calibrated(
        cls,
        omega_m: float = 2 * math.pi * 1.3e6,
        eta: float = 0.056,
        delta: float = 2 * math.pi * 15e3,
        duration: float = 620e-6,
        ramp: float = 120e-6,
        ratio: float | None = None,
        extra_stark: float = 0.0,
        fock: int = 3,
    ) -> "PulseParams":
        """Tone amplitudes and detunings giving a resonant pi pulse of ``duration``.

        Both Raman pairs share one tone ratio ``W_aL / W_aE`` (default: the
        ratio that minimizes the differential light shift,
        ``sqrt((w_m - delta) / delta)``). ``w_aE = 0`` and ``w_aL`` solves the
        resonance condition ``d'_aL = d'_aE``.
        """
        if ratio is None:
            ratio = math.sqrt((omega_m - delta) / delta)
        target = math.pi / (duration - 1.25 * ramp)
        probe = cls(
            omega_m, eta, (delta, delta), {k: 0.0 for k in ("0L", "0E", "1L", "1E")},
            {"0L": omega_m, "0E": 0.0, "1L": omega_m, "1E": 0.0}, ramp, duration, extra_stark, fock,
        )

        def with_amp(w_e):
            rabi = {"0L": ratio * w_e, "0E": w_e, "1L": ratio * w_e, "1E": w_e}
            tone = dict(probe.tone)
            for a in "01":
                tone[a + "L"] = resonant_tone(omega_m, delta, rabi[a + "L"], rabi[a + "E"], extra_stark, eta)
            return replace(probe, rabi=rabi, tone=tone)

        def mismatch(w_e):
            return effective_params(with_amp(w_e), warn=False).omega[0] - target

        # Omega_a grows monotonically with the E-tone amplitude on this bracket
        hi = delta
        while mismatch(hi) < 0:
            hi *= 2.0
            if hi > 1e3 * delta:
                raise InvalidArgument("cannot reach the target effective Rabi frequency")
        return with_amp(brentq(mismatch, 1e-9 * delta, hi, xtol=1e-12 * delta))


def envelope(p: PulseParams, t) -> np.ndarray:
    """Sine-squared ramps of length ``ramp`` at both ends, 1 in between."""
    t = np.asarray(t, dtype=float)
    if p.ramp == 0:
        return np.where((t >= 0) & (t <= p.duration), 1.0, 0.0)
    up = np.sin(0.5 * np.pi * np.clip(t / p.ramp, 0.0, 1.0)) ** 2
    down = np.sin(0.5 * np.pi * np.clip((p.duration - t) / p.ramp, 0.0, 1.0)) ** 2
    return np.minimum(up, down)


def light_shift(rabi: float, tone: float, delta: float) -> float:
    """Second-order shift of a level driven to an auxiliary level at ``-delta``.

    ``-W^2 / (4 (w - delta))``: the auxiliary level sits at ``w - delta``
    above the driven level in the tone frame.
    """
    return -rabi**2 / (4.0 * (tone - delta))


def sideband_shift(eta: float, rabi_l: float, tone_l: float, omega_m: float, delta: float, n: int = 0) -> float:
    """Light shift of ``|a_L, n+1>`` from the resonant sideband of its own tone.

    The red-detuned tone couples ``|a_L, n+1>`` to ``|a_g, n>`` with Rabi
    frequency ``eta W_aL sqrt(n+1)`` at detuning ``w_aL - w_m - delta``.
    """
    return light_shift(eta * rabi_l * math.sqrt(n + 1), tone_l - omega_m, delta)


def _l_detuning(omega_m, eta, delta, w_l, tone_l, extra_stark):
    return omega_m - tone_l + light_shift(w_l, tone_l, delta) + sideband_shift(eta, w_l, tone_l, omega_m, delta) + extra_stark


def resonant_tone(
    omega_m: float, delta: float, w_l: float, w_e: float, extra_stark: float = 0.0, eta: float = 0.0
) -> float:
    """``w_aL`` solving ``d'_aL = d'_aE`` with ``w_aE = 0``.

    Without the sideband shift (``eta = 0``) and with ``x = w_aL - delta`` the
    condition reads ``x^2 - B x + W_L^2 / 4 = 0``,
    ``B = w_m - delta + extra - W_E^2 / (4 delta)``, whose large root is the
    sideband branch. The sideband shift is then included by a few Newton
    steps started from that root.
    """
    B = omega_m - delta + extra_stark - w_e**2 / (4.0 * delta)
    disc = B * B - w_l * w_l
    if disc < 0:
        raise InvalidArgument("no resonant sideband tone: light shift exceeds the mode frequency")
    tone = delta + 0.5 * (B + math.sqrt(disc))
    if eta == 0.0:
        return tone
    target = light_shift(w_e, 0.0, delta)
    for _ in range(50):
        f = _l_detuning(omega_m, eta, delta, w_l, tone, extra_stark) - target
        h = 1e-6 * delta
        df = (_l_detuning(omega_m, eta, delta, w_l, tone + h, extra_stark) - target - f) / h
        step = f / df
        tone -= step
        if abs(step) < 1e-12 * omega_m:
            break
    return tone


@dataclass(frozen=True)
class EffectiveParams:
    omega: tuple  # (W_0, W_1)
    detuning: dict  # d'_aL, d'_aE keyed "0L", ...
    dispersive: bool

    @property
    def mismatch(self) -> tuple:
        return tuple(self.detuning[a + "L"] - self.detuning[a + "E"] for a in "01")

    stark: dict = None  # light shifts alone, keyed like ``detuning``

    @property
    def differential_stark(self) -> float:
        """Light shift of the error words minus that of the codewords (pair 0)."""
        return self.stark["0E"] - self.stark["0L"]


def effective_params(p: PulseParams, warn: bool = True) -> EffectiveParams:
    """Second-order (adiabatic-elimination) parameters at full envelope.

    ``W_a = eta W_aL W_aE w_m / (2 d_a (w_aL - d_a))``;
    ``d'_aL = w_m - w_aL + shift(W_aL) + sideband shift`` and
    ``d'_aE = -w_aE + shift(W_aE)``, shifts as in ``light_shift``.
    """
    omega, det, stark = [], {}, {}
    dispersive = True
    for i, a in enumerate("01"):
        d = p.delta[i]
        wl, we = p.rabi[a + "L"], p.rabi[a + "E"]
        tl, te = p.tone[a + "L"], p.tone[a + "E"]
        omega.append(p.eta * wl * we * p.omega_m / (2.0 * d * (tl - d)))
        stark[a + "L"] = light_shift(wl, tl, d) + sideband_shift(p.eta, wl, tl, p.omega_m, d) + p.extra_stark
        stark[a + "E"] = light_shift(we, te, d)
        det[a + "L"] = p.omega_m - tl + stark[a + "L"]
        det[a + "E"] = -te + stark[a + "E"]
        if max(abs(we) / abs(d - te), abs(wl) / abs(tl - d)) > DISPERSIVE_LIMIT:
            dispersive = False
    if warn and not dispersive:
        warnings.warn("tone Rabi frequency exceeds a third of its detuning: effective model unreliable", stacklevel=2)
    return EffectiveParams(tuple(omega), det, dispersive, stark)


# ----------------------------------------------------------- Hamiltonian


def _projector(i: int, j: int) -> np.ndarray:
    m = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    m[i, j] = 1.0
    return m


@dataclass(frozen=True)
class _Model:
    """``H(s) = h0 + s V + s^2 S`` in the tone-rotating frame."""

    h0: np.ndarray
    V: np.ndarray
    S: np.ndarray

    @classmethod
    def build(cls, p: PulseParams) -> "_Model":
        fock = FockSpace(p.fock)
        eye_f = np.eye(p.fock)
        diag = np.zeros(N_LEVELS)
        for i, a in enumerate("01"):
            diag[i] = -p.delta[i]
            for b in "LE":
                diag[level_index(f"{a}_{b}")] = -p.tone[a + b]
        h0 = np.kron(np.diag(diag), eye_f) + p.omega_m * np.kron(np.eye(N_LEVELS), fock.number)
        side = eye_f + 1j * p.eta * (fock.a + fock.adag)
        half = np.zeros_like(h0)
        for i, a in enumerate("01"):
            for b in "LE":
                half += 0.5 * p.rabi[a + b] * np.kron(_projector(level_index(f"{a}_{b}"), i), side)
        code_levels = np.diag([0, 0, 1, 1, 0, 0]).astype(complex)
        return cls(h0.astype(complex), half + dag(half), p.extra_stark * np.kron(code_levels, eye_f))

    def at(self, s: float) -> np.ndarray:
        return self.h0 + s * self.V + s * s * self.S


def build_lab_hamiltonian(p: PulseParams, t: float) -> np.ndarray:
    """``H(t)`` in the tone-rotating frame."""
    return _Model.build(p).at(float(envelope(p, t)))


# ---------------------------------------------------------- dressed states


def dressed_exchange(p: PulseParams, pair: str = "0", n: int = 0) -> tuple[float, float]:
    """(detuning, Rabi) of the dressed ``|a_E, n> <-> |a_L, n+1>`` exchange at full intensity.

    The two exact eigenvectors with the largest weight on that pair are
    orthonormalized inside the pair (polar decomposition) and the exact
    eigenvalues are mapped back, giving an effective 2x2 Hamiltonian.
    """
    H = _Model.build(p).at(1.0)
    w, v = np.linalg.eigh(H)
    idx = [level_index(f"{pair}_E") * p.fock + n, level_index(f"{pair}_L") * p.fock + n + 1]
    weight = np.sum(np.abs(v[idx, :]) ** 2, axis=0)
    keep = np.argsort(weight)[-2:]
    B = v[np.ix_(idx, keep)]
    u, _, vh = np.linalg.svd(B)
    Q = u @ vh
    h = Q @ np.diag(w[keep]) @ dag(Q)
    return float(np.real(h[0, 0] - h[1, 1])), float(2.0 * abs(h[0, 1]))


def calibrate_resonance(p: PulseParams, n: int = 0) -> PulseParams:
    """Retune ``w_aL`` so the dressed exchange of each pair is resonant."""
    tone = dict(p.tone)
    for a in "01":
        start = tone[a + "L"]
        span = 4.0 * max(p.rabi[a + "L"] ** 2 / p.omega_m, p.rabi[a + "E"] ** 2 / p.delta[int(a)], 1e-3 * p.delta[int(a)])

        def mismatch(x, a=a):
            return dressed_exchange(replace(p, tone={**tone, a + "L": x}), a, n)[0]

        lo, hi = start - span, start + span
        if mismatch(lo) * mismatch(hi) > 0:
            raise InvalidArgument("dressed resonance not bracketed near the formula tone")
        tone[a + "L"] = brentq(mismatch, lo, hi, xtol=1e-9 * p.omega_m)
    return replace(p, tone=tone)


# ------------------------------------------------------------- integration


@dataclass
class IntegrationResult:
    state: np.ndarray
    steps: int
    refinement_change: float


MIN_STEPS = 64
MAX_STEPS = 1 << 18
_GAUSS = (0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0)


def _magnus_steps(model: _Model, env, t0: float, t1: float, steps: int) -> np.ndarray:
    """Fourth-order Magnus propagators for ``H(env(t))`` on a uniform grid of ``[t0, t1]``, stacked."""
    h = (t1 - t0) / steps
    c = math.sqrt(3.0) / 12.0 * h * h
    t = t0 + h * np.arange(steps)
    s1, s2 = (env(t + g * h) for g in _GAUSS)
    # H(s) = h0 + s V + s^2 S, so [H2, H1] expands into three fixed commutators
    h0, V, S = model.h0, model.V, model.S
    c_hv, c_hs, c_vs = (B @ A - A @ B for A, B in ((h0, V), (h0, S), (V, S)))

    def lin(a, b):
        return a[:, None, None] * b[None]

    K = (
        h * h0[None]
        + 0.5 * h * (lin(s1 + s2, V) + lin(s1**2 + s2**2, S))
        - 1j * c * (lin(s2 - s1, c_hv) + lin(s2**2 - s1**2, c_hs) + lin(s1 * s2 * (s2 - s1), c_vs))
    )
    w, v = np.linalg.eigh(0.5 * (K + np.conj(np.swapaxes(K, 1, 2))))
    return np.einsum("kij,kj,klj->kil", v, np.exp(-1j * w), v.conj())


def _ordered_product(stack: np.ndarray) -> np.ndarray:
    # later steps act on the left; pairwise reduction keeps rounding low
    while len(stack) > 1:
        if len(stack) % 2:
            stack = np.concatenate([stack, np.eye(stack.shape[1], dtype=complex)[None]])
        stack = stack[1::2] @ stack[0::2]
    return stack[0]


def _ramp_up(r: float):
    return lambda t: np.sin(0.5 * np.pi * np.clip(t / r, 0.0, 1.0)) ** 2


def _ramp_down(r: float):
    return lambda t: np.sin(0.5 * np.pi * np.clip(1.0 - t / r, 0.0, 1.0)) ** 2


@dataclass
class _Pieces:
    up: np.ndarray
    down: np.ndarray
    plateau_w: np.ndarray
    plateau_v: np.ndarray
    steps: int
    change: float

    def total(self, plateau: float) -> np.ndarray:
        P = (self.plateau_v * np.exp(-1j * self.plateau_w * plateau)) @ dag(self.plateau_v)
        return self.down @ P @ self.up


def _pieces(p: PulseParams, tol: float) -> _Pieces:
    """Ramp propagators (step-halving controlled) and the plateau eigensystem.

    The ramps do not depend on the total duration, so one ``_Pieces``
    serves every duration with the same amplitudes.
    """
    if not 1e-12 <= tol <= 1e-6:
        raise InvalidArgument("tol must lie in [1e-12, 1e-6]")
    model = _Model.build(p)
    w, v = np.linalg.eigh(model.at(1.0))
    dim = model.h0.shape[0]
    if p.ramp == 0:
        eye = np.eye(dim, dtype=complex)
        return _Pieces(eye, eye, w, v, 0, 0.0)

    def ramps(steps):
        up = _ordered_product(_magnus_steps(model, _ramp_up(p.ramp), 0.0, p.ramp, steps))
        down = _ordered_product(_magnus_steps(model, _ramp_down(p.ramp), 0.0, p.ramp, steps))
        return up, down

    steps = MIN_STEPS
    prev = ramps(steps)
    change = np.inf
    while True:
        steps *= 2
        if steps > MAX_STEPS:
            raise IntegrationFailure("step halving did not converge", {"steps": steps // 2, "change": change})
        cur = ramps(steps)
        change = max(float(np.max(np.abs(a - b))) for a, b in zip(cur, prev))
        if change < tol:
            break
        prev = cur
    return _Pieces(cur[0], cur[1], w, v, steps, change)


def integrate(p: PulseParams, initial: np.ndarray, tol: float = 1e-8) -> IntegrationResult:
    """Time-ordered evolution over ``[0, duration]`` with step-halving control.

    ``initial`` is a ket or a matrix of kets (columns). The ramps use
    fourth-order Magnus steps on a uniform grid, halved until the ramp
    propagators change by less than ``tol``; the constant-envelope plateau
    is exponentiated exactly.
    """
    pieces = _pieces(p, tol)
    y0 = np.asarray(initial, dtype=complex)
    out = pieces.total(p.duration - 2 * p.ramp) @ y0
    norm0 = np.linalg.norm(y0, axis=0)
    if np.max(np.abs(np.linalg.norm(out, axis=0) - norm0)) > 10 * tol:
        raise IntegrationFailure("norm drift exceeds 10 tol", {"steps": pieces.steps, "change": pieces.change})
    return IntegrationResult(out, pieces.steps, pieces.change)


def propagator_at(p: PulseParams, tol: float = 1e-8) -> np.ndarray:
    return integrate(p, np.eye(N_LEVELS * p.fock, dtype=complex), tol).state


# --------------------------------------------------------------- validation


def effective_propagator(p: PulseParams) -> np.ndarray:
    """Ideal sideband exchange with pulse area ``W_0 * area_time``, embedded in the pulse basis."""
    eff = effective_params(p, warn=False)
    theta = 0.5 * eff.omega[0] * p.area_time
    fock = p.fock
    dim = N_LEVELS * fock
    U = np.eye(dim, dtype=complex)
    for a in "01":
        for n in range(fock - 1):
            e = level_index(f"{a}_E") * fock + n
            l = level_index(f"{a}_L") * fock + n + 1
            c, s = math.cos(theta * math.sqrt(n + 1)), math.sin(theta * math.sqrt(n + 1))
            U[e, e] = U[l, l] = c
            U[l, e] = U[e, l] = -1j * s
    return U


@dataclass
class ValidationReport:
    """Pulse-level versus effective model on the basis inputs ``|s, 0>``.

    Infidelities compare populations only (``|<ideal|out>|^2`` with the
    frame phases removed), since the phonon reset that follows a pulse
    erases the relative phase between phonon sectors.
    """

    max_infidelity: float
    infidelities: dict
    omega_formula: float
    omega_fitted: float | None
    aux_population: float
    logical_phase: float

    @property
    def omega_relative_error(self) -> float | None:
        if self.omega_fitted is None:
            return None
        return abs(self.omega_fitted - self.omega_formula) / self.omega_formula


BASIS_STARTS = ("0_L", "1_L", "0_E", "1_E")


def _population_overlap(ideal: np.ndarray, out: np.ndarray) -> float:
    # overlap with frame-dependent phases stripped component-wise
    return float(np.sum(np.abs(ideal) * np.abs(out)) ** 2)


def validate_effective(p: PulseParams, tol: float = 1e-8, fit_points: int = 0) -> ValidationReport:
    """Compare ``integrate`` with the effective exchange on ``{0_L, 1_L, 0_E, 1_E} x |0>``.

    ``fit_points > 0`` adds a scan of that many durations from which the
    peak effective Rabi frequency is fitted (see ``fit_rabi``).
    """
    U = propagator_at(p, tol)
    U_eff = effective_propagator(p)
    inf, aux = {}, 0.0
    for label in BASIS_STARTS:
        psi = _ket(label, p.fock)
        out = U @ psi
        inf[label] = 1.0 - _population_overlap(U_eff @ psi, out)
        aux = max(aux, float(np.sum(np.abs(out[: 2 * p.fock]) ** 2)))
    a0 = _ket("0_L", p.fock).conj() @ U @ _ket("0_L", p.fock)
    a1 = _ket("1_L", p.fock).conj() @ U @ _ket("1_L", p.fock)
    fitted = fit_rabi(p, fit_points, tol)[0] if fit_points else None
    return ValidationReport(
        max_infidelity=max(inf.values()),
        infidelities=inf,
        omega_formula=effective_params(p, warn=False).omega[0],
        omega_fitted=fitted,
        aux_population=aux,
        logical_phase=float(np.angle(a1 / a0)),
    )


@dataclass
class DynamicsScan:
    durations: np.ndarray
    transfer: np.ndarray  # P(0_L, 1) from |0_E, 0>
    retained: np.ndarray  # P(0_L, 0) from |0_L, 0>
    aux: np.ndarray  # auxiliary population from |0_E, 0>

    @property
    def peak_duration(self) -> float:
        """Peak of a parabola through the three samples around the maximum."""
        i = int(np.argmax(self.transfer))
        if 0 < i < len(self.transfer) - 1:
            x, y = self.durations[i - 1 : i + 2], self.transfer[i - 1 : i + 2]
            a, b, _ = np.polyfit(x, y, 2)
            if a < 0:
                return float(-b / (2 * a))
        return float(self.durations[i])


def _outcome(p: PulseParams, U: np.ndarray) -> tuple[float, float, float]:
    out_e = U @ _ket("0_E", p.fock)
    out_l = U @ _ket("0_L", p.fock)
    transfer = abs(_ket("0_L", p.fock, 1).conj() @ out_e) ** 2
    retained = abs(_ket("0_L", p.fock).conj() @ out_l) ** 2
    aux = float(np.sum(np.abs(out_e[: 2 * p.fock]) ** 2))
    return float(transfer), float(retained), aux


def pulse_outcome(p: PulseParams, tol: float = 1e-8) -> tuple[float, float, float]:
    """(transfer from ``|0_E,0>``, retention of ``|0_L,0>``, auxiliary population) for one pulse."""
    return _outcome(p, propagator_at(p, tol))


def duration_scan(p: PulseParams, durations, tol: float = 1e-8) -> DynamicsScan:
    """Duration scan at fixed tone amplitudes and ramps."""
    durations = np.asarray(durations, dtype=float)
    if np.any(durations < 2 * p.ramp):
        raise InvalidArgument("every duration must cover both ramps")
    pieces = _pieces(p, tol)
    rows = [_outcome(p, pieces.total(T - 2 * p.ramp)) for T in durations]
    arr = np.array(rows)
    return DynamicsScan(durations, arr[:, 0], arr[:, 1], arr[:, 2])


def retained_trace(p: PulseParams, samples: int = 200, steps: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """``P(0_L, 0)`` during one pulse from ``|0_L, 0>`` on ``samples`` equally spaced times."""
    model = _Model.build(p)
    times = np.linspace(0.0, p.duration, samples)
    per = max(1, steps // (samples - 1))
    env = lambda t: envelope(p, t)  # noqa: E731
    y = _ket("0_L", p.fock)
    idx = level_index("0_L") * p.fock
    pops = [abs(y[idx]) ** 2]
    for k in range(samples - 1):
        y = _ordered_product(_magnus_steps(model, env, times[k], times[k + 1], per)) @ y
        pops.append(abs(y[idx]) ** 2)
    return times, np.array(pops)


def fit_rabi(p: PulseParams, points: int = 7, tol: float = 1e-8) -> tuple[float, float]:
    """Fit ``P = A sin^2(W (T - 5 r / 4) / 2)`` over total durations ``T``.

    Durations span ``[2 r + 0.1 T_pi, 2 r + 1.4 T_pi]``; returns (W, A).
    """
    T_pi = math.pi / effective_params(p, warn=False).omega[0]
    durations = np.linspace(2 * p.ramp + 0.1 * T_pi, 2 * p.ramp + 1.4 * T_pi, points)
    scan = duration_scan(p, durations, tol)
    offset = 1.25 * p.ramp

    def model(T, w, A):
        return A * np.sin(0.5 * w * (T - offset)) ** 2

    (w, A), _ = curve_fit(model, durations, scan.transfer, p0=(math.pi / T_pi, 1.0))
    return float(abs(w)), float(A)
