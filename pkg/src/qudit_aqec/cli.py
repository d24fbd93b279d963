"""Command-line interface.

Exit codes: 0 success, 1 bad arguments or configuration, 2 Knill-Laflamme
failure, 3 fit failure (partial outputs are still written).

CSV columns
-----------
codewords      m, zero_L, one_L, zero_E, one_E
cycle          row, I, X, Y, Z (real part of chi; JSON carries real and imag)
pulse-validate duration_us, transfer, retained, aux
lifetime       config, time_ms, F_chi, ci_lo, ci_hi
budget         source, from_error, from_logical
rotation-scan  phi, plus_L, minus_L, plus_E, minus_E
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import spin_operators
from .codes import build_code, code_search, kl_verify
from .config import RunConfig, load_config
from .errors import AqecError, FitFailure, InvalidArgument, UnsupportedManifold

log = logging.getLogger("qudit_aqec")

EXIT_OK, EXIT_USAGE, EXIT_KL, EXIT_FIT = 0, 1, 2, 3


def num(x) -> float:
    """Round to 12 significant digits for serialization."""
    return float(f"{float(x):.12g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return num(obj)
    if isinstance(obj, complex):
        return {"re": num(obj.real), "im": num(obj.imag)}
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seed: int
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    files: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    argv: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


class Output:
    """Collects primary outputs; writes them under ``--out`` or prints them."""

    def __init__(self, args, cfg: RunConfig):
        self.args = args
        self.cfg = cfg
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str):
        self.files[name] = text

    def primary(self, stem: str, header, rows, payload):
        if self.args.format == "csv":
            self.add(f"{stem}.csv", to_csv(header, rows))
        else:
            self.add(f"{stem}.json", to_json(payload))

    def flush(self):
        if self.args.out is None:
            for name, text in self.files.items():
                if not name.endswith(".svg"):
                    sys.stdout.write(text)
            return
        out = Path(self.args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            (out / name).write_text(text)
        manifest = RunManifest(
            command=self.args.command,
            config_hash=self.cfg.digest(),
            seed=self.cfg.seed,
            files=sorted(self.files),
            config=self.cfg.raw,
            argv=sys.argv[1:],
        )
        (out / "manifest.json").write_text(manifest.to_json())


# ----------------------------------------------------------------- commands


def cmd_codewords(args, cfg, out: Output) -> int:
    code = build_code(cfg.spin, cfg.kappa_t)
    m = [str(v) for v in code.manifold.m_values]
    words = {k: np.real(getattr(code, k)) for k in ("zero_L", "one_L", "zero_E", "one_E")}
    rows = [[m[i]] + [float(words[k][i]) for k in words] for i in range(len(m))]
    out.primary("codewords", ["m", *words], rows, {"spin": cfg.spin, "kappa_t": cfg.kappa_t, "m": m, **words})
    return EXIT_OK


_ERROR_NAMES = ("I", "Sz", "Sz2", "E0", "E1", "E2")


def _error_ops(code, names):
    from .noise import DephasingParams, lindblad_kraus

    sz = spin_operators(code.manifold).z
    ops = []
    kraus = None
    for name in names:
        if name == "I":
            ops.append(np.eye(code.dim))
        elif name == "Sz":
            ops.append(sz)
        elif name == "Sz2":
            ops.append(sz @ sz)
        elif name in ("E0", "E1", "E2"):
            if kraus is None:
                kraus = lindblad_kraus(DephasingParams(rate=max(code.kappa_t, 1e-12), duration=1.0, l_max=3), sz).ops
            ops.append(kraus[int(name[1])])
        else:
            raise InvalidArgument(f"unknown error operator {name!r}; choose from {', '.join(_ERROR_NAMES)}")
    return ops


def cmd_kl_check(args, cfg, out: Output) -> int:
    names = [s.strip() for s in args.errors.split(",") if s.strip()]
    try:
        code = build_code(cfg.spin, cfg.kappa_t)
    except UnsupportedManifold as exc:
        out.add("kl_check.json", to_json({"spin": cfg.spin, "passed": False, "reason": str(exc)}))
        return EXIT_KL
    rep = kl_verify(code, _error_ops(code, names), tol=args.tol)
    payload = {
        "spin": cfg.spin,
        "kappa_t": cfg.kappa_t,
        "errors": names,
        "passed": rep.passed,
        "max_violation": rep.max_violation,
        "alpha_re": np.real(rep.alpha),
        "alpha_im": np.imag(rep.alpha),
    }
    out.add("kl_check.json", to_json(payload))
    return EXIT_OK if rep.passed else EXIT_KL


def cmd_code_search(args, cfg, out: Output) -> int:
    try:
        codes = code_search(cfg.spin)
    except UnsupportedManifold:
        codes = []
    found = []
    for c in codes:
        found.append(
            {
                "pairs": [[str(m) for m in p] for p in c.pairs],
                "weights": list(c.weights),
                "zero_L": np.real(c.zero_L),
                "one_L": np.real(c.one_L),
            }
        )
    out.add("code_search.json", to_json({"spin": cfg.spin, "count": len(found), "codes": found}))
    return EXIT_OK if found else EXIT_KL


def _cycle_config(cfg: RunConfig, ideal: bool):
    from .engine import CycleConfig
    from .noise import InstrumentImperfections

    return CycleConfig(
        tau_ec=cfg.tau_ec,
        tau_i=cfg.tau_i,
        fock=cfg.fock,
        imperfections=InstrumentImperfections() if ideal else cfg.imperfections(),
    )


def cmd_cycle(args, cfg, out: Output) -> int:
    from .engine import decode_state, encode_state
    from .experiments import _averaged_cycle_channel
    from .tomography import PAULI_LABELS, process_tomography

    code = build_code(cfg.spin, cfg.kappa_t)
    ch = _averaged_cycle_channel(code, _cycle_config(cfg, args.ideal))
    chi = process_tomography(lambda r: decode_state(code, ch(encode_state(code, r, args.start)))[0])
    infid = 1.0 - chi.fidelity()
    payload = {"start": args.start, "F_chi": 1.0 - infid, "chi": chi.to_json()}
    rows = [[PAULI_LABELS[i], *[float(v) for v in np.real(chi.matrix[i])]] for i in range(4)]
    out.primary("cycle", ["row", *PAULI_LABELS], rows, payload)
    if args.format == "csv":
        out.add("cycle_summary.json", to_json({"start": args.start, "F_chi": 1.0 - infid}))
    return EXIT_OK


def cmd_pulse_validate(args, cfg, out: Output) -> int:
    from .pulse import PulseParams, duration_scan, effective_params, fit_rabi

    p = PulseParams.calibrated(**cfg.pulse_kwargs())
    durations = np.linspace(args.t_min * 1e-6, args.t_max * 1e-6, args.points)
    scan = duration_scan(p, durations)
    w_fit, amp = fit_rabi(p)
    eff = effective_params(p, warn=False)
    summary = {
        "peak_duration_us": scan.peak_duration * 1e6,
        "max_transfer": float(np.max(scan.transfer)),
        "min_retained": float(np.min(scan.retained)),
        "omega_fitted": w_fit,
        "omega_formula": eff.omega[0],
        "omega_relative_error": abs(w_fit - eff.omega[0]) / eff.omega[0],
        "fit_amplitude": amp,
    }
    rows = zip(durations * 1e6, scan.transfer, scan.retained, scan.aux)
    payload = {**summary, "durations_us": durations * 1e6, "transfer": scan.transfer, "retained": scan.retained, "aux": scan.aux}
    out.primary("pulse_dynamics", ["duration_us", "transfer", "retained", "aux"], rows, payload)
    if args.format == "csv":
        out.add("pulse_summary.json", to_json(summary))
    return EXIT_OK


def cmd_lifetime(args, cfg, out: Output) -> int:
    from .experiments import ExperimentConfig, fit_gaussian_decay, lambda_factor, run_lifetime
    from .plotting import svg_plot

    tags = ["physical", "logical-plain", "logical-aqec"] + (["ground"] if args.ground else [])
    curves, fits, failed = {}, {}, []
    for k, tag in enumerate(tags):
        common = dict(
            trajectories=cfg.trajectories, shots=cfg.shots, seed=cfg.seed + k, metric=cfg.metric,
            tau_ec=cfg.tau_ec, tau_i=cfg.tau_i, fock=cfg.fock, kappa_t=cfg.kappa_t,
        )
        if tag == "logical-aqec":
            duration = cfg.cycles[-1] * (cfg.tau_ec + cfg.tau_i)
            ec = ExperimentConfig(
                tag, cfg.schedule(duration), cycles=cfg.cycles, imperfections=cfg.imperfections(),
                noise_during_ec=cfg.noise_during_ec, **common,
            )
        else:
            ec = ExperimentConfig(tag, cfg.schedule(max(cfg.times)), times=cfg.times, **common)
        curves[tag] = run_lifetime(ec, threads=args.threads)
        try:
            fits[tag] = fit_gaussian_decay(curves[tag].times, curves[tag].fidelity)
        except FitFailure as exc:
            log.error("fit failed for %s: %s", tag, exc)
            failed.append(tag)
    rows = [[tag, t * 1e3, f, lo, hi] for tag, c in curves.items() for t, f, lo, hi in c.rows()]
    curve_payload = {
        tag: {"time_ms": c.times * 1e3, "F_chi": c.fidelity, "stderr": c.stderr, "ci_lo": c.ci_low, "ci_hi": c.ci_high}
        for tag, c in curves.items()
    }
    out.primary("lifetime", ["config", "time_ms", "F_chi", "ci_lo", "ci_hi"], rows, curve_payload)
    summary = {
        tag: {"A": f.A, "tau_ms": f.tau * 1e3, "C": f.C, "errors": {"A": f.errors["A"], "tau_ms": f.errors["tau"] * 1e3, "C": f.errors["C"]}}
        for tag, f in fits.items()
    }
    if "physical" in fits and "logical-aqec" in fits:
        lam = lambda_factor(fits["logical-aqec"], fits["physical"])
        summary["Lambda"] = {"value": lam.value, "error": lam.error}
    summary["failed_fits"] = failed
    out.add("lifetime_fits.json", to_json(summary))
    series = []
    for tag, c in curves.items():
        s = {"x": c.times * 1e3, "y": c.fidelity, "label": tag}
        if tag in fits:
            fx = np.linspace(0, c.times[-1], 200)
            s.update(fit_x=fx * 1e3, fit_y=fits[tag](fx))
        series.append(s)
    out.add("lifetime.svg", svg_plot(series, "t (ms)", "F_chi", "Process fidelity decay"))
    return EXIT_FIT if failed else EXIT_OK


def cmd_budget(args, cfg, out: Output) -> int:
    from .experiments import BudgetMagnitudes, error_budget

    imp = cfg.imperfections()
    mags = BudgetMagnitudes(
        nbar=imp.nbar,
        mode_drift_pp=imp.mode_drift_pp,
        intensity_rel=imp.intensity_rel,
        **({"stark_phase": imp.stark_phase} if imp.stark_phase > 0 else {}),
        **({"stark_phase_error": imp.stark_phase_error} if imp.stark_phase_error > 0 else {}),
    )
    from .engine import CycleConfig

    rows = error_budget(build_code(cfg.spin, cfg.kappa_t), CycleConfig(tau_ec=cfg.tau_ec, tau_i=cfg.tau_i, fock=cfg.fock), mags)
    table = [[r.source, r.from_error, r.from_logical] for r in rows]
    out.primary(
        "budget",
        ["source", "from_error", "from_logical"],
        table,
        {"rows": [{"source": r.source, "from_error": r.from_error, "from_logical": r.from_logical} for r in rows]},
    )
    return EXIT_OK


def cmd_rotation_scan(args, cfg, out: Output) -> int:
    from .experiments import phase_rotation_scan

    code = build_code(cfg.spin, cfg.kappa_t)
    phi = np.linspace(args.phi_min, args.phi_max, args.points) * np.pi
    scan = phase_rotation_scan(code, phi, shots=cfg.shots, seed=cfg.seed)
    cols = ("plus_L", "minus_L", "plus_E", "minus_E")
    rows = zip(phi, *(getattr(scan, c) for c in cols))
    out.primary("rotation_scan", ["phi", *cols], rows, {"phi": phi, **{c: getattr(scan, c) for c in cols}})
    return EXIT_OK


COMMANDS = {
    "codewords": cmd_codewords,
    "kl-check": cmd_kl_check,
    "code-search": cmd_code_search,
    "cycle": cmd_cycle,
    "pulse-validate": cmd_pulse_validate,
    "lifetime": cmd_lifetime,
    "budget": cmd_budget,
    "rotation-scan": cmd_rotation_scan,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML run configuration")
    common.add_argument("--seed", type=int, help="master seed (overrides experiment.seed)")
    common.add_argument("--out", type=Path, help="output directory; stdout when omitted")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--spin", help="spin quantum number (overrides code.spin)")
    common.add_argument("--kappa-t", type=float, help="overrides code.kappa_t")
    common.add_argument("--trajectories", type=int, help="overrides experiment.trajectories")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="qudit-aqec", description="Autonomous qudit error-correction simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("codewords", parents=[common], help="print codeword amplitudes")
    p = sub.add_parser("kl-check", parents=[common], help="Knill-Laflamme check")
    p.add_argument("--errors", default="I,Sz", help=f"comma list from {', '.join(_ERROR_NAMES)}")
    p.add_argument("--tol", type=float, default=1e-10)
    sub.add_parser("code-search", parents=[common], help="enumerate two-level codes")
    p = sub.add_parser("cycle", parents=[common], help="one-cycle process matrix")
    p.add_argument("--start", choices=("L", "E"), default="E")
    p.add_argument("--ideal", action="store_true", help="disable imperfections")
    p = sub.add_parser("pulse-validate", parents=[common], help="pulse-level duration scan")
    p.add_argument("--t-min", type=float, default=300.0, help="us")
    p.add_argument("--t-max", type=float, default=1000.0, help="us")
    p.add_argument("--points", type=int, default=29)
    p = sub.add_parser("lifetime", parents=[common], help="Monte-Carlo lifetime curves and fits")
    p.add_argument("--ground", action="store_true", help="also run the ground-manifold qubit")
    sub.add_parser("budget", parents=[common], help="one-cycle error budget")
    p = sub.add_parser("rotation-scan", parents=[common], help="populations after exp(i phi S_z)")
    p.add_argument("--phi-min", type=float, default=0.0, help="units of pi")
    p.add_argument("--phi-max", type=float, default=2.0, help="units of pi")
    p.add_argument("--points", type=int, default=41)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.override("experiment", "seed", args.seed)
        if args.spin is not None:
            cfg = cfg.override("code", "spin", args.spin)
        if args.kappa_t is not None:
            cfg = cfg.override("code", "kappa_t", args.kappa_t)
        if args.trajectories is not None:
            cfg = cfg.override("experiment", "trajectories", args.trajectories)
        if args.threads < 1:
            raise InvalidArgument("--threads must be >= 1")
        out = Output(args, cfg)
        code = COMMANDS[args.command](args, cfg, out)
    except AqecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
