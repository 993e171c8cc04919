"""Flat JSON run configuration with schema validation and reference-device defaults."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import jsonschema

from .model import ActuatorParams, Linear, SqueezeFilm, VoltageProfile
from .statics import PhysicalParams, nondimensionalize

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "preset": {"enum": ["table1", "table2"]},
        # dimensional device data
        "m": _pos, "l": _pos, "A": _pos, "k": _pos, "xi": _nonneg, "epsilon": _pos,
        "Gtilde1": _num, "Gtilde2": _num,
        # dimensionless overrides
        "e": _pos, "c": _nonneg, "gamma": _nonneg, "g1": _num, "g2": _num,
        "damping": {"enum": ["linear", "squeeze"]},
        "v0": _pos, "delta": _nonneg, "omega": _pos,
        "harmonics": {
            "type": "array",
            "items": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
            "minItems": 1,
        },
        "d": _nonneg,
        # solver knobs
        "step": _pos, "t_end": _pos,
        "N": {"type": "integer", "minimum": 1, "maximum": 256},
        "floquet_m": {"type": "integer", "minimum": 2},
        "tol": _pos,
        "history": {
            "oneOf": [
                {"enum": ["equilibrium", "x1", "x2"]},
                {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
            ]
        },
        "coords": {"enum": ["gap", "displacement"]},
        "squeeze_slope": {"enum": ["gap", "displacement"]},
        "hill_a": _num, "hill_b": _num,
    },
}

#: exact rounded dimensionless values of the reference device
TABLE2 = {"e": 9.9e-6, "c": 5.4e-3, "g1": 3e-4, "g2": 0.37}
DEFAULTS = {"v0": 20.0, "delta": 0.0, "omega": 1.0, "d": 0.0, "gamma": 3e-4, "damping": "linear"}


class ConfigError(ValueError):
    """Configuration failed schema validation or is inconsistent."""


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    params: ActuatorParams
    physical: PhysicalParams
    c: float
    gamma: float
    step: float | None
    t_end: float | None
    N: int
    floquet_m: int
    tol: float
    history: object
    coords: str
    squeeze_slope: str
    hill_a: float | None
    hill_b: float

    @property
    def period(self):
        return self.params.period


def validate(doc):
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc.message}") from None


def from_dict(doc):
    """Build a ``RunConfig``; physical keys default to the reference device."""
    doc = dict(doc or {})
    validate(doc)
    phys_keys = ("m", "l", "A", "k", "xi", "epsilon", "Gtilde1", "Gtilde2")
    # "m" doubles as the device mass; Floquet resolution is "floquet_m"
    physical = PhysicalParams(**{k: float(doc[k]) for k in phys_keys if k in doc})
    if doc.get("preset", "table1") == "table2":
        base = dict(TABLE2)
    else:
        nd = nondimensionalize(physical)
        base = {"e": nd.e, "c": nd.c, "g1": nd.G1, "g2": nd.G2}
    vals = {**DEFAULTS, **base, **{k: doc[k] for k in doc if k in base or k in DEFAULTS}}
    try:
        if "harmonics" in doc:
            harmonics = tuple(tuple(h) for h in doc["harmonics"])
        else:
            harmonics = ((1, 1.0, 0.0),)
        voltage = VoltageProfile(float(vals["v0"]), float(vals["delta"]), harmonics,
                                 2.0 * math.pi / float(vals["omega"]))
        damping = Linear(float(vals["c"])) if vals["damping"] == "linear" else SqueezeFilm(float(vals["gamma"]))
        params = ActuatorParams(float(vals["e"]), damping, voltage, float(vals["g1"]), float(vals["g2"]),
                                float(vals["d"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(
        raw=doc,
        params=params,
        physical=physical,
        c=float(vals["c"]),
        gamma=float(vals["gamma"]),
        step=doc.get("step"),
        t_end=doc.get("t_end"),
        N=int(doc.get("N", 32)),
        floquet_m=int(doc.get("floquet_m", 64)),
        tol=float(doc.get("tol", 1e-10)),
        history=doc.get("history", "equilibrium"),
        coords=doc.get("coords", "gap"),
        squeeze_slope=doc.get("squeeze_slope", "gap"),
        hill_a=doc.get("hill_a"),
        hill_b=float(doc.get("hill_b", 0.0)),
    )


def load(path):
    """Read a JSON file (``None`` gives the defaults)."""
    if path is None:
        return from_dict({})
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration {path!r}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    return from_dict(doc)
