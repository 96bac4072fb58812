"""Run configuration: JSON schema, defaults and conversion to SI objects."""

from __future__ import annotations

import copy
import json
from pathlib import Path

import jsonschema

from .analysis import StructuredOptions
from .errors import ConfigError
from .model import (
    ConstitutiveParams,
    SelfActionMode,
    WaveConfig,
    params_from_mapping,
)
from .pseudospectra import GridSpec
from .units import parse_quantity

__all__ = ["SCHEMA", "DEFAULTS", "load_config", "merge", "validate", "RunSettings",
           "param_dimension", "parse_param_value"]

_QTY = {"type": "string"}
_NUM_OR_QTY = {"type": ["string", "number"]}

_STRUCTURED = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "rel": {"type": "number", "minimum": 0},
        "target": {"enum": ["chi", "alpha", "lambda", "mu", "zeta", "gamma", "k0"]},
        "n_samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "sampling": {"enum": ["boundary", "ball"]},
        "q": {"type": "number", "minimum": 0, "maximum": 1},
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "mode": {"enum": [m.value for m in SelfActionMode]},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                **{k: _QTY for k in ("lambda", "mu", "k1", "k2", "k2p", "k3", "k3p", "chi",
                                     "alpha", "zeta", "gamma", "k0", "varsigma", "rho")},
                "phi": {"type": "number"},
                "k2p_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
        },
        "wave": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k": _QTY,
                "n": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
            },
        },
        "allow_inadmissible": {"type": "boolean"},
        "classify_tol": {"type": "number", "exclusiveMinimum": 0},
        "jobs": {"type": ["integer", "null"], "minimum": 1},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": ["string", "null"]}, "prefix": {"type": "string"}},
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "re": {"type": "array", "items": _QTY, "minItems": 2, "maxItems": 2},
                "im": {"type": "array", "items": _QTY, "minItems": 2, "maxItems": 2},
                "nx": {"type": "integer", "minimum": 2},
                "ny": {"type": "integer", "minimum": 2},
            },
        },
        "pseudospectrum": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "levels": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "containment_epsilon": {"type": "number", "exclusiveMinimum": 0},
                "right_half_only": {"type": "boolean"},
            },
        },
        "structured": _STRUCTURED,
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "param": {"type": "string"},
                "values": {"type": "array", "items": _NUM_OR_QTY, "minItems": 1},
                "normality": {"type": "boolean"},
                "structured": {"type": "boolean"},
            },
        },
        "threshold": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "param": {"type": "string"},
                "bracket": {"type": "array", "items": _NUM_OR_QTY, "minItems": 2, "maxItems": 2},
                "tol": _NUM_OR_QTY,
                "criterion": {"enum": ["eigen", "structured"]},
            },
        },
    },
}

DEFAULTS = {
    "mode": "none",
    "params": {},
    "wave": {"k": "1rad/m", "n": [1.0, 0.0, 0.0]},
    "allow_inadmissible": False,
    "classify_tol": 1e-6,
    "jobs": None,
    "output": {"dir": None, "prefix": "run"},
    "grid": {"nx": 200, "ny": 200},
    "pseudospectrum": {"containment_epsilon": 1e-6, "right_half_only": False},
    "structured": {"rel": 0.05, "target": "chi", "n_samples": 400, "seed": 0,
                   "sampling": "boundary", "q": 0.0},
    "sweep": {"normality": False, "structured": False},
    "threshold": {"criterion": "eigen"},
}


def merge(base: dict, override: dict) -> dict:
    """Recursive dict merge; ``override`` wins, ``None`` values in it are ignored."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def validate(cfg: dict) -> dict:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    return cfg


def load_config(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return validate(data)


_DIMS = {"lambda": "stress", "mu": "stress", "chi": "stress", "alpha": "stress",
         "zeta": "stress", "gamma": "stress", "k1": "stress", "k2": "stress", "k2p": "stress",
         "k3": "stress", "k3p": "stress", "k0": "stress/area", "varsigma": "friction",
         "rho": "density", "phi": None}


def param_dimension(name: str) -> str | None:
    if name not in _DIMS:
        raise ConfigError(f"unknown parameter {name!r}; known: {', '.join(sorted(_DIMS))}")
    return _DIMS[name]


def parse_param_value(name: str, value) -> float:
    dim = param_dimension(name)
    if dim is None:
        if isinstance(value, str):
            raise ConfigError(f"{name} is dimensionless; give a bare number")
        return float(value)
    return parse_quantity(value, dim)


class RunSettings:
    """Typed view of a validated, defaults-merged config."""

    def __init__(self, cfg: dict):
        self.raw = cfg
        self.mode = SelfActionMode.parse(cfg["mode"])
        self.params: ConstitutiveParams = params_from_mapping(cfg["params"])
        w = cfg["wave"]
        k = parse_quantity(w["k"], "wavenumber")
        try:
            self.wave = WaveConfig.along(w["n"], k=k)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.allow_inadmissible = cfg["allow_inadmissible"]
        self.classify_tol = cfg["classify_tol"]
        self.jobs = cfg["jobs"]
        s = cfg["structured"]
        self.structured = StructuredOptions(rel=s["rel"], target=s["target"],
                                            n_samples=s["n_samples"], seed=s["seed"],
                                            sampling=s["sampling"], q=s["q"])
        self.epsilon = s.get("epsilon")

    def require_friction(self, swept: str | None = None):
        """Friction modes need ``varsigma`` unless it is the swept parameter."""
        if swept in ("phi", "varsigma", "sigma"):
            return
        if self.mode.has_friction and self.params.varsigma is None:
            raise ConfigError(f"mode {self.mode.value} needs 'varsigma' or 'phi'")

    def grid(self) -> GridSpec | None:
        g = self.raw["grid"]
        if "re" not in g or "im" not in g:
            return None
        re = [parse_quantity(x, "frequency") for x in g["re"]]
        im = [parse_quantity(x, "frequency") for x in g["im"]]
        try:
            return GridSpec(re[0], re[1], im[0], im[1], g["nx"], g["ny"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
