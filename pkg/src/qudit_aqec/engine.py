"""Effective-Hamiltonian model of one autonomous correction cycle.

Joint states live on ``host spin (2S+1) x Fock (N)``, spin index outermost.
A cycle is: idle dephasing for ``tau_i`` -> entropy conversion for
``tau_ec`` -> phonon reset to a thermal state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import FockSpace, KrausChannel, dag, partial_trace, propagator, spin_operators, tensor
from .codes import CodeSpec, kl_verify
from .errors import InvalidArgument
from .noise import InstrumentImperfections, NoiseTrajectory, coherent_rotation, thermal_populations

DEFAULT_FOCK = 6


@dataclass(frozen=True)
class EntropyConversionParams:
    omega_ec: float
    duration: float
    fock: int = DEFAULT_FOCK

    def __post_init__(self):
        if self.omega_ec <= 0 or self.duration <= 0:
            raise InvalidArgument("omega_ec and duration must be positive")

    @classmethod
    def pi_pulse(cls, duration: float, fock: int = DEFAULT_FOCK) -> "EntropyConversionParams":
        return cls(math.pi / duration, duration, fock)


# ---------------------------------------------------------------- encoding


def ground_extended_dim(code: CodeSpec) -> int:
    return code.dim + 2


def embed_host(code: CodeSpec, op_or_state: np.ndarray) -> np.ndarray:
    """Embed a host operator/state into ``{|0_g>, |1_g>} + host`` (ground levels first)."""
    x = np.asarray(op_or_state, dtype=complex)
    d = ground_extended_dim(code)
    if x.ndim == 1:
        out = np.zeros(d, dtype=complex)
        out[2:] = x
        return out
    out = np.zeros((d, d), dtype=complex)
    out[2:, 2:] = x
    return out


def encoder_unitary(code: CodeSpec, space: str = "L") -> np.ndarray:
    """Unitary swapping ``|s_g>`` with ``|s_L>`` (or ``|s_E>`` for ``space="E"``).

    All amplitudes are real and positive in the codeword convention; the
    decoder is the adjoint (the swap is self-inverse).
    """
    d = ground_extended_dim(code)
    targets = code.logical if space == "L" else code.error
    U = np.eye(d, dtype=complex)
    for s, target in enumerate(targets):
        g = np.zeros(d, dtype=complex)
        g[s] = 1.0
        t = embed_host(code, target)
        U += np.outer(t, g) + np.outer(g, t) - np.outer(g, g) - np.outer(t, t)
    return U


def encode_state(code: CodeSpec, rho_qubit: np.ndarray, space: str = "L") -> np.ndarray:
    """Host density matrix for a qubit state encoded into the code (or error) space."""
    v = np.column_stack(code.logical if space == "L" else code.error)
    return v @ np.asarray(rho_qubit, dtype=complex) @ dag(v)


def decode_state(code: CodeSpec, rho_host: np.ndarray) -> tuple[np.ndarray, float]:
    """Ideal decode: the (unnormalized) code-space qubit block and the leaked weight."""
    v = np.column_stack(code.logical)
    block = dag(v) @ rho_host @ v
    leak = float(np.real(np.trace(rho_host)) - np.real(np.trace(block)))
    return block, max(leak, 0.0)


# --------------------------------------------------------- entropy conversion


def _code_ops(code: CodeSpec):
    lowering = np.outer(code.zero_L, code.zero_E.conj()) + np.outer(code.one_L, code.one_E.conj())
    return lowering, code.code_projector, code.error_projector


def h_ec(p: EntropyConversionParams, code: CodeSpec) -> np.ndarray:
    """``(W/2)(|0_L><0_E| + |1_L><1_E|) (x) a^dag + h.c.``"""
    A, _, _ = _code_ops(code)
    fock = FockSpace(p.fock)
    half = 0.5 * p.omega_ec * tensor(A, fock.adag)
    return half + dag(half)


def _fn_diag(values, fn):
    return np.diag(fn(np.asarray(values, dtype=float))).astype(complex)


def u_ec(p: EntropyConversionParams, code: CodeSpec, t: float | None = None) -> np.ndarray:
    """Closed-form ``exp(-i H_EC t)`` (defaults to ``t = p.duration``).

    Uses the cos/sin functions of ``sqrt(a^dag a)`` and ``sqrt(a a^dag)``;
    the truncated ``a a^dag`` vanishes on the top Fock level, matching the
    truncated Hamiltonian exactly.
    """
    t = p.duration if t is None else t
    A, P_L, P_E = _code_ops(code)
    fock = FockSpace(p.fock)
    c = 0.5 * p.omega_ec * t
    n_up = np.arange(p.fock)  # spectrum of a^dag a
    n_dn = np.arange(1, p.fock + 1).astype(float)  # spectrum of a a^dag, truncated
    n_dn[-1] = 0.0
    cos_up = _fn_diag(n_up, lambda n: np.cos(c * np.sqrt(n)))
    cos_dn = _fn_diag(n_dn, lambda n: np.cos(c * np.sqrt(n)))
    # sin(c sqrt(n)) / sqrt(n) with the n -> 0 limit c
    sinc_up = _fn_diag(n_up, lambda n: c * np.sinc(c * np.sqrt(n) / np.pi))
    sinc_dn = _fn_diag(n_dn, lambda n: c * np.sinc(c * np.sqrt(n) / np.pi))
    eye_s = np.eye(code.dim)
    eye_f = np.eye(p.fock)
    return (
        np.kron(eye_s, eye_f)
        + np.kron(P_L, cos_up - eye_f)
        + np.kron(P_E, cos_dn - eye_f)
        - 1j * np.kron(A, sinc_up @ fock.adag)
        - 1j * np.kron(dag(A), sinc_dn @ fock.a)
    )


@dataclass(frozen=True)
class RecoveryChannel:
    r0: np.ndarray
    r1: np.ndarray

    def as_kraus(self) -> KrausChannel:
        return KrausChannel([self.r0, self.r1])

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return self.r0 @ rho @ dag(self.r0) + self.r1 @ rho @ dag(self.r1)


def recovery_channel(code: CodeSpec) -> RecoveryChannel:
    A, P_L, _ = _code_ops(code)
    return RecoveryChannel(r0=P_L, r1=A)


def conditional_kraus(U: np.ndarray, spin_dim: int, fock: int, k: int, j: int = 0) -> np.ndarray:
    """Spin operator ``<k|U|j>`` with phonon indices ``k`` (out) and ``j`` (in)."""
    return U.reshape(spin_dim, fock, spin_dim, fock)[:, k, :, j]


# ------------------------------------------------------------------- reset


def reset_channel(nbar: float, N: int, spin_dim: int = 1) -> KrausChannel:
    """Replace the phonon with a thermal state, identity on the spin.

    Kraus operators ``sqrt(p_j) I (x) |j><k|``.
    """
    p = thermal_populations(nbar, N)
    eye = np.eye(spin_dim)
    ops = []
    for j in np.nonzero(p)[0]:
        for k in range(N):
            op = np.zeros((N, N))
            op[j, k] = math.sqrt(p[j])
            ops.append(np.kron(eye, op))
    return KrausChannel(ops)


def reset_phonon(rho_joint: np.ndarray, nbar: float, spin_dim: int, N: int) -> np.ndarray:
    """Trace out the phonon and re-tensor a thermal state (fast path of reset_channel)."""
    rho_spin = partial_trace(rho_joint, [spin_dim, N], 0)
    return np.kron(rho_spin, np.diag(thermal_populations(nbar, N)))


# ------------------------------------------------------------------- cycle


@dataclass(frozen=True)
class CycleConfig:
    """Timing and imperfections of one correction cycle.

    ``stark_shift`` is the differential light shift between the error and
    code manifolds (rad/s) that the Raman tones are tuned to cancel; an
    intensity error ``e`` leaves a residual detuning ``((1+e)^2 - 1)
    stark_shift``.
    """

    tau_ec: float
    tau_i: float
    nbar: float = 0.0
    fock: int = DEFAULT_FOCK
    omega_ec: float | None = None
    noise_during_ec: bool = False
    imperfections: InstrumentImperfections = field(default_factory=InstrumentImperfections)
    stark_shift: float = 0.0

    def __post_init__(self):
        if self.tau_ec <= 0:
            raise InvalidArgument("tau_ec must be positive")
        if self.tau_i < 0:
            raise InvalidArgument("tau_i must be non-negative")

    @property
    def period(self) -> float:
        return self.tau_i + self.tau_ec

    @property
    def rabi(self) -> float:
        return self.omega_ec if self.omega_ec is not None else math.pi / self.tau_ec

    @property
    def effective_nbar(self) -> float:
        return self.nbar + self.imperfections.nbar + self.imperfections.heating_rate * self.tau_i

    def ec_params(self) -> EntropyConversionParams:
        return EntropyConversionParams(self.rabi, self.tau_ec, self.fock)

    def with_imperfections(self, **kw) -> "CycleConfig":
        return replace(self, imperfections=replace(self.imperfections, **kw))


def ec_unitary(
    code: CodeSpec,
    cfg: CycleConfig,
    drift: float = 0.0,
    intensity: float = 0.0,
    ec_detuning: float = 0.0,
) -> np.ndarray:
    """Entropy-conversion propagator including per-shot offsets.

    ``drift`` is the motional frequency offset (rad/s), ``intensity`` the
    relative Rabi error, ``ec_detuning`` a field detuning acting during the
    pulse (rad/s per unit m).
    """
    p = cfg.ec_params()
    if drift == 0.0 and intensity == 0.0 and ec_detuning == 0.0:
        U = u_ec(p, code)
    else:
        scale = (1.0 + intensity) ** 2
        H = scale * h_ec(p, code)
        fock = FockSpace(cfg.fock)
        _, _, P_E = _code_ops(code)
        if drift:
            H = H + drift * np.kron(np.eye(code.dim), fock.number)
        if intensity and cfg.stark_shift:
            H = H + (scale - 1.0) * cfg.stark_shift * np.kron(P_E, np.eye(cfg.fock))
        if ec_detuning:
            H = H + ec_detuning * np.kron(spin_operators(code.manifold).z, np.eye(cfg.fock))
        U = propagator(H, cfg.tau_ec)
    imp = cfg.imperfections
    if imp.stark_phase or imp.stark_phase_error:
        U = _stark_rotation(code, cfg.fock, imp.stark_phase, imp.stark_phase_error) @ U
    return U


def _stark_rotation(code, fock, phase_l, phase_e):
    z_c = np.outer(code.zero_L, code.zero_L.conj()) - np.outer(code.one_L, code.one_L.conj())
    excited = np.eye(fock)
    excited[0, 0] = 0.0
    gen = 0.5 * phase_l * np.kron(z_c, np.eye(fock)) + 0.5 * phase_e * np.kron(z_c, excited)
    return propagator(gen, 1.0)


def cycle_kraus(
    code: CodeSpec,
    cfg: CycleConfig,
    idle_phase: float = 0.0,
    drift: float = 0.0,
    intensity: float = 0.0,
    ec_detuning: float = 0.0,
    U_ec: np.ndarray | None = None,
) -> KrausChannel:
    """Spin-only Kraus form of one cycle, exact when the phonon enters thermal.

    ``K_{k,j} = sqrt(p_j) <k|U_ec|j> U_idle`` where ``p_j`` are the thermal
    populations after reset.
    """
    if U_ec is None:
        U_ec = ec_unitary(code, cfg, drift, intensity, ec_detuning)
    p = thermal_populations(cfg.effective_nbar, cfg.fock)
    U_idle = coherent_rotation(idle_phase, spin_operators(code.manifold).z)
    ops = []
    for j in np.nonzero(p)[0]:
        for k in range(cfg.fock):
            K = conditional_kraus(U_ec, code.dim, cfg.fock, k, j)
            if np.any(K):
                ops.append(math.sqrt(p[j]) * K @ U_idle)
    return KrausChannel(ops)


def aqec_cycle(
    rho_joint: np.ndarray,
    cfg: CycleConfig,
    code: CodeSpec,
    trajectory: NoiseTrajectory | None = None,
    t0: float = 0.0,
    drift: float = 0.0,
    intensity: float = 0.0,
) -> np.ndarray:
    """One cycle on the joint spin-phonon density matrix.

    The idle rotation angle is the phase the trajectory accumulates over
    ``[t0, t0 + tau_i]``; with ``noise_during_ec`` the mean detuning over the
    conversion window is added to the conversion Hamiltonian.
    """
    d, N = code.dim, cfg.fock
    if rho_joint.shape != (d * N, d * N):
        raise InvalidArgument(f"joint state shape {rho_joint.shape} != {(d * N, d * N)}")
    theta, ec_det = 0.0, 0.0
    if trajectory is not None:
        theta = trajectory.phase(t0, t0 + cfg.tau_i)
        if cfg.noise_during_ec:
            ec_det = trajectory.phase(t0 + cfg.tau_i, t0 + cfg.period) / cfg.tau_ec
    U_idle = np.kron(coherent_rotation(theta, spin_operators(code.manifold).z), np.eye(N))
    U = ec_unitary(code, cfg, drift, intensity, ec_det) @ U_idle
    rho = U @ rho_joint @ dag(U)
    return reset_phonon(rho, cfg.effective_nbar, d, N)


def joint_state(code: CodeSpec, spin_state: np.ndarray, fock: int = DEFAULT_FOCK, nbar: float = 0.0) -> np.ndarray:
    """``rho_spin (x) thermal(nbar)``; ``spin_state`` may be a ket."""
    s = np.asarray(spin_state, dtype=complex)
    if s.ndim == 1:
        s = np.outer(s, s.conj())
    return np.kron(s, np.diag(thermal_populations(nbar, fock)))


# ------------------------------------------------------- error transparency


@dataclass
class TransparencyReport:
    """Absolute residual norms plus ``scale = ||H||`` for unit-free comparison."""

    code_block: float
    error_block: float
    offset: complex
    scale: float

    @property
    def relative(self) -> tuple[float, float]:
        if self.scale == 0.0:
            return 0.0, 0.0
        return self.code_block / self.scale, self.error_block / self.scale


def error_transparency_check(H: np.ndarray, code: CodeSpec) -> TransparencyReport:
    """Residuals of ``P_C H P_C = 0`` and ``P_z^dag H P_z = P_C H P_C + c P_C``.

    ``P_z = S_z P_C / sqrt(alpha_z)`` with ``alpha_z = <0_L|S_z^2|0_L>``; ``c``
    is the least-squares scalar. ``H`` may act on the host or on host x Fock.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape[0] % code.dim:
        raise InvalidArgument("H dimension is not a multiple of the host dimension")
    extra = H.shape[0] // code.dim
    sz = spin_operators(code.manifold).z
    alpha_z = kl_verify(code, [np.eye(code.dim), sz]).alpha[1, 1].real
    # compress onto the code isometry: same norms, without cancellation error
    V = np.kron(code.basis[:, :2], np.eye(extra))
    W = np.kron(sz, np.eye(extra)) @ V / math.sqrt(alpha_z)
    code_block = dag(V) @ H @ V
    diff = dag(W) @ H @ W - code_block
    c = np.trace(diff) / diff.shape[0]
    return TransparencyReport(
        code_block=float(np.linalg.norm(code_block, 2)),
        error_block=float(np.linalg.norm(diff - c * np.eye(diff.shape[0]), 2)),
        offset=complex(c),
        scale=float(np.linalg.norm(H, 2)),
    )
