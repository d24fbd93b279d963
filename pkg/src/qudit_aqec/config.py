"""TOML run configuration.

Human-facing units live in the file (nT, ms, us, Hz, kHz, MHz, multiples of
pi); everything is converted to SI and angular frequency on load. Example::

    [code]
    spin = "5/2"
    kappa_t = 0.0

    [noise]
    field_sigma_nT = 16.0
    update_interval_ms = 100.0
    g_factor = 1.2
    regime = "quasi-static"

    [imperfections]
    nbar = 0.02
    heating_rate = 0.0          # quanta per second
    mode_drift_pp_Hz = 200.0
    intensity_rel = 0.01
    stark_phase_pi = 0.0
    stark_phase_error_pi = 0.0

    [cycle]
    tau_ec_us = 620.0
    tau_i_ms = 0.12
    fock = 6
    noise_during_ec = false

    [pulse]
    omega_m_MHz = 1.3
    delta_kHz = 15.0
    eta = 0.056
    ramp_us = 120.0
    duration_us = 620.0
    fock = 3

    [experiment]
    seed = 0
    trajectories = 1000
    shots = 0                   # 0 means exact outcome probabilities
    metric = "chi"
    times_ms = [0.0, 3.0, 16]   # start, stop, points (physical / uncorrected)
    cycles = [0, 48, 2]         # start, stop, step (AQEC)
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import InvalidArgument
from .noise import InstrumentImperfections, NoiseSchedule

TWO_PI = 2 * math.pi

DEFAULTS: dict = {
    "code": {"spin": "5/2", "kappa_t": 0.0},
    "noise": {"field_sigma_nT": 16.0, "update_interval_ms": 100.0, "g_factor": 1.2, "regime": "quasi-static"},
    "imperfections": {
        "nbar": 0.02,
        "heating_rate": 0.0,
        "mode_drift_pp_Hz": 200.0,
        "intensity_rel": 0.01,
        "stark_phase_pi": 0.0,
        "stark_phase_error_pi": 0.0,
    },
    "cycle": {"tau_ec_us": 620.0, "tau_i_ms": 0.12, "fock": 6, "noise_during_ec": False},
    "pulse": {"omega_m_MHz": 1.3, "delta_kHz": 15.0, "eta": 0.056, "ramp_us": 120.0, "duration_us": 620.0, "fock": 3},
    "experiment": {
        "seed": 0,
        "trajectories": 1000,
        "shots": 0,
        "metric": "chi",
        "times_ms": [0.0, 3.0, 16],
        "cycles": [0, 48, 2],
    },
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for section, values in over.items():
        if section not in out:
            raise InvalidArgument(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise InvalidArgument(f"[{section}] must be a table")
        for key, val in values.items():
            if key not in out[section]:
                raise InvalidArgument(f"unknown key {section}.{key}")
            out[section][key] = val
    return out


@dataclass
class RunConfig:
    raw: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    # ---- accessors in SI / rad/s
    @property
    def spin(self) -> str:
        return str(self.raw["code"]["spin"])

    @property
    def kappa_t(self) -> float:
        return float(self.raw["code"]["kappa_t"])

    @property
    def seed(self) -> int:
        return int(self.raw["experiment"]["seed"])

    @property
    def trajectories(self) -> int:
        return int(self.raw["experiment"]["trajectories"])

    @property
    def shots(self) -> int | None:
        s = int(self.raw["experiment"]["shots"])
        return None if s == 0 else s

    @property
    def metric(self) -> str:
        return str(self.raw["experiment"]["metric"])

    def schedule(self, duration: float) -> NoiseSchedule:
        n = self.raw["noise"]
        return NoiseSchedule.from_g_factor(
            n["field_sigma_nT"] * 1e-9,
            n["update_interval_ms"] * 1e-3,
            duration,
            g_factor=float(n["g_factor"]),
            regime=n["regime"],
        )

    def imperfections(self) -> InstrumentImperfections:
        i = self.raw["imperfections"]
        return InstrumentImperfections(
            nbar=float(i["nbar"]),
            heating_rate=float(i["heating_rate"]),
            mode_drift_pp=TWO_PI * float(i["mode_drift_pp_Hz"]),
            intensity_rel=float(i["intensity_rel"]),
            stark_phase=math.pi * float(i["stark_phase_pi"]),
            stark_phase_error=math.pi * float(i["stark_phase_error_pi"]),
        )

    @property
    def tau_ec(self) -> float:
        return float(self.raw["cycle"]["tau_ec_us"]) * 1e-6

    @property
    def tau_i(self) -> float:
        return float(self.raw["cycle"]["tau_i_ms"]) * 1e-3

    @property
    def fock(self) -> int:
        return int(self.raw["cycle"]["fock"])

    @property
    def noise_during_ec(self) -> bool:
        return bool(self.raw["cycle"]["noise_during_ec"])

    def pulse_kwargs(self) -> dict:
        p = self.raw["pulse"]
        return dict(
            omega_m=TWO_PI * float(p["omega_m_MHz"]) * 1e6,
            delta=TWO_PI * float(p["delta_kHz"]) * 1e3,
            eta=float(p["eta"]),
            ramp=float(p["ramp_us"]) * 1e-6,
            duration=float(p["duration_us"]) * 1e-6,
            fock=int(p["fock"]),
        )

    @property
    def times(self) -> tuple:
        start, stop, points = self.raw["experiment"]["times_ms"]
        return tuple(np.linspace(start * 1e-3, stop * 1e-3, int(points)))

    @property
    def cycles(self) -> tuple:
        start, stop, step = (int(x) for x in self.raw["experiment"]["cycles"])
        return tuple(range(start, stop + 1, step))

    # ---- plumbing
    def override(self, section: str, key: str, value) -> "RunConfig":
        return RunConfig(_merge(self.raw, {section: {key: value}}))

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def load_config(path: str | Path | None = None) -> RunConfig:
    """Defaults overlaid with the TOML file at ``path`` (if given)."""
    if path is None:
        return RunConfig()
    p = Path(path)
    if not p.is_file():
        raise InvalidArgument(f"config file not found: {p}")
    with p.open("rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise InvalidArgument(f"cannot parse {p}: {exc}") from exc
    return RunConfig(_merge(DEFAULTS, data))
