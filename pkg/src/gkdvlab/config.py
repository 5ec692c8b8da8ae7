"""Experiment configuration: a versioned JSON schema with defaults per
scenario and field-level validation errors."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

SCHEMA_VERSION = 1

SCENARIOS = ("soliton-propagation", "perturbed-soliton", "linear-liouville",
             "virial-audit", "multi-soliton", "c-star-scan", "spectral-report")

SHAPES = ("gaussian", "S_c", "Q_prime", "random")

# Monotonicity constant, calibrated on coarse runs (L=100, N=2048,
# dt=2e-3; measured 4.054) and frozen; see `scenarios.calibrate_K`.
K_CAL = 4.1

_BASE = {
    "nonlinearity": {"kind": "pure_power", "p": 2},
    "c0": 1.0,
    "grid": {"L": 200.0, "N": 4096},
    "dt": 1e-3,
    "T_final": 20.0,
    "cadence": 0.1,
    "frame": {"speed": None, "sponge_width": 40.0, "sponge_strength": 5.0},
    "perturbation": {"shape": "gaussian", "amplitude": 0.0, "center": 0.0, "width": 2.0},
    "seed": 0,
    "anchors": {"x0": [5.0, 10.0, 20.0], "t0": None},
    "K_cal": K_CAL,
    "region_left": -20.0,
    "spectral": {"B": None, "sigma0": 0.05},
    "tolerances": {},
}

_SCENARIO_DEFAULTS = {
    "soliton-propagation": {
        "tolerances": {"l2_error": 1e-5, "drift": 1e-9, "monotonicity_slack": 1e-8}},
    "perturbed-soliton": {
        "perturbation": {"shape": "gaussian", "amplitude": 0.01},
        "T_final": 100.0,
        "tolerances": {"local_decay": 0.2, "c_settle": 1e-3, "monotonicity_slack": 1e-8}},
    "virial-audit": {
        "perturbation": {"shape": "gaussian", "amplitude": 0.01},
        "T_final": 100.0,
        "tolerances": {"ratio_spread": 10.0, "V_floor": 1e-12}},
    "linear-liouville": {
        "dt": 1e-2, "T_final": 200.0, "cadence": 1.0,
        "perturbation": {"shape": "random", "amplitude": 0.01, "center": 0.0, "width": 3.0},
        "tolerances": {"window": 20.0, "t_early": 20.0, "decay": 0.5}},
    "multi-soliton": {
        "grid": {"L": 256.0, "N": 4096},
        "T_final": 50.0, "cadence": 0.5,
        "solitons": [{"c": 1.0, "rho": 30.0}, {"c": 0.5, "rho": -30.0}],
        "tolerances": {"c_drift": 1e-3, "recover": 1e-8}},
    "c-star-scan": {"nonlinearity": {"kind": "power_difference", "p": 2, "q": 3},
                    "tolerances": {"c_star_rel": 1e-8}},
    "spectral-report": {"grid": {"L": 64.0, "N": 1024}, "frame": {"sponge_width": 0.0},
                        "tolerances": {"residual": 1e-8}},
}


class ConfigError(ValueError):
    pass


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def defaults(scenario: str) -> dict:
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario: unknown scenario {scenario!r}")
    return _merge(_BASE, _SCENARIO_DEFAULTS.get(scenario, {}))


@dataclass
class ExperimentConfig:
    scenario: str
    data: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.data[key]

    def get(self, key, default=None):
        return self.data.get(key, default)

    @property
    def tol(self) -> dict:
        return self.data["tolerances"]

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be an object")
        version = raw.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"schema_version: unsupported version {version!r}")
        scenario = raw.get("scenario")
        if scenario is None:
            raise ConfigError("scenario: missing field")
        data = _merge(defaults(scenario), {k: v for k, v in raw.items()
                                           if k not in ("scenario", "schema_version")})
        cfg = cls(scenario, data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(raw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "scenario": self.scenario, **self.data}

    def validate(self):
        d = self.data

        def positive(path, value, integer=False):
            ok = isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0
            if integer:
                ok = ok and float(value).is_integer()
            if not ok:
                raise ConfigError(f"{path}: must be a positive {'integer' if integer else 'number'}")

        positive("c0", d["c0"])
        positive("grid.L", d["grid"]["L"])
        positive("grid.N", d["grid"]["N"], integer=True)
        n = int(d["grid"]["N"])
        if n & (n - 1) or n < 8:
            raise ConfigError("grid.N: must be a power of two >= 8")
        positive("dt", d["dt"])
        positive("T_final", d["T_final"])
        positive("cadence", d["cadence"])
        for name in ("cadence", "T_final"):
            steps = d[name] / d["dt"]
            if abs(steps - round(steps)) > 1e-9 * steps:
                raise ConfigError(f"{name}: must be a multiple of dt")
        if not isinstance(d["seed"], int) or d["seed"] < 0 or d["seed"] >= 2 ** 64:
            raise ConfigError("seed: must be an unsigned 64-bit integer")
        pert = d["perturbation"]
        if pert.get("shape") not in SHAPES:
            raise ConfigError(f"perturbation.shape: must be one of {', '.join(SHAPES)}")
        if not isinstance(pert.get("amplitude"), (int, float)) or pert["amplitude"] < 0:
            raise ConfigError("perturbation.amplitude: must be a nonnegative number")
        positive("perturbation.width", pert.get("width"))
        frame = d["frame"]
        if frame.get("speed") is not None and not isinstance(frame["speed"], (int, float)):
            raise ConfigError("frame.speed: must be a number or null")
        if frame.get("sponge_width", 0) < 0 or frame["sponge_width"] >= 0.5 * d["grid"]["L"]:
            raise ConfigError("frame.sponge_width: must be in [0, L/2)")
        for x0 in d["anchors"]["x0"]:
            positive("anchors.x0[]", x0)
        positive("K_cal", d["K_cal"])
        if "solitons" in d:
            for i, s in enumerate(d["solitons"]):
                positive(f"solitons[{i}].c", s.get("c"))
                if not isinstance(s.get("rho"), (int, float)):
                    raise ConfigError(f"solitons[{i}].rho: must be a number")
        from .nonlinearity import Nonlinearity

        try:
            Nonlinearity.from_config(d["nonlinearity"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
