"""Experiment configuration: JSON schema, loading and object construction."""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .amplifier import LossModel, PumpConfig
from .dispersion import JtwpaDevice, LineParams, ResonatorSpec, comb_resonators
from .errors import ConfigError

TASKS = ("dispersion", "spectrum", "tune", "loss_sweep", "two_qubit", "cluster")

_POS = {"type": "number", "exclusiveMinimum": 0}
_RANGE = {
    "type": "object",
    "required": ["start", "stop", "num"],
    "additionalProperties": False,
    "properties": {"start": {"type": "number"}, "stop": {"type": "number"},
                   "num": {"type": "integer", "minimum": 1}},
}
_ETA = {"type": "number", "exclusiveMinimum": 0, "maximum": 1}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["task"],
    "additionalProperties": False,
    "properties": {
        "task": {"enum": list(TASKS)},
        "description": {"type": "string"},
        "device": {
            "type": "object",
            "required": ["line"],
            "additionalProperties": False,
            "properties": {
                "line": {
                    "type": "object",
                    "required": ["n_cells"],
                    "additionalProperties": False,
                    "properties": {
                        "n_cells": {"type": "integer", "minimum": 1},
                        "a": _POS, "c": _POS, "l": _POS, "z0": _POS, "i_c": _POS,
                        "omega_p": _POS, "plasma_frequency_hz": _POS,
                    },
                    "oneOf": [{"required": ["c", "l", "i_c"]}, {"required": ["z0", "i_c"]}],
                },
                "resonators": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["c_c", "c_r"],
                        "additionalProperties": False,
                        "properties": {"c_c": _POS, "c_r": _POS, "l_r": _POS, "frequency_hz": _POS},
                        "oneOf": [{"required": ["l_r"]}, {"required": ["frequency_hz"]}],
                    },
                },
                "comb": {
                    "type": "object",
                    "required": ["count", "spacing_fraction", "coupling_scale"],
                    "additionalProperties": False,
                    "properties": {"count": {"type": "integer", "minimum": 1},
                                   "spacing_fraction": _POS, "coupling_scale": _POS},
                },
            },
        },
        "pump": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"omega_pump": _POS, "frequency_hz": _POS,
                           "beta": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                           "i_pump": {"type": "number", "minimum": 0}},
            "oneOf": [{"required": ["omega_pump"]}, {"required": ["frequency_hz"]}],
            "anyOf": [{"required": ["beta"]}, {"required": ["i_pump"]}],
        },
        "grid": {
            "type": "object",
            "required": ["points"],
            "additionalProperties": False,
            "properties": {"omega_min": _POS, "omega_max": _POS, "f_min_hz": _POS,
                           "f_max_hz": _POS, "points": {"type": "integer", "minimum": 2}},
            "oneOf": [{"required": ["omega_min", "omega_max"]}, {"required": ["f_min_hz", "f_max_hz"]}],
        },
        "loss": {"type": "object", "required": ["eta"], "additionalProperties": False,
                 "properties": {"eta": _ETA}},
        "tune": {
            "type": "object",
            "required": ["target_hz", "knob", "bracket_hz"],
            "additionalProperties": False,
            "properties": {
                "target_hz": _POS,
                "knob": {"enum": ["pump_frequency", "resonator_frequency"]},
                "bracket_hz": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
                "resonator_index": {"type": "integer", "minimum": 0},
            },
        },
        "loss_sweep": {
            "type": "object",
            "required": ["etas", "betas"],
            "additionalProperties": False,
            "properties": {"etas": {"type": "array", "items": _ETA, "minItems": 1},
                           "betas": _RANGE, "target_gain_db": {"type": "number"}},
        },
        "two_qubit": {
            "type": "object",
            "required": ["qubit_hz", "etas", "betas"],
            "additionalProperties": False,
            "properties": {"qubit_hz": _POS, "gamma": _POS,
                           "etas": {"type": "array", "items": _ETA, "minItems": 1},
                           "betas": _RANGE},
        },
        "cluster": {
            "type": "object",
            "required": ["r_values"],
            "additionalProperties": False,
            "properties": {
                "layout": {"enum": ["ring8", "ring16", "d2_16"]},
                "graph": {
                    "type": "object",
                    "required": ["n", "edges"],
                    "additionalProperties": False,
                    "properties": {
                        "n": {"type": "integer", "minimum": 1},
                        "edges": {"type": "array", "items": {
                            "type": "array", "minItems": 3, "maxItems": 3,
                            "prefixItems": [{"type": "integer", "minimum": 0},
                                            {"type": "integer", "minimum": 0},
                                            {"type": "number", "minimum": -1, "maximum": 1}]}},
                    },
                },
                "hadamard": {"type": "boolean"},
                "r_values": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                "flow_check": {"type": "boolean"},
            },
            "oneOf": [{"required": ["layout"]}, {"required": ["graph"]}],
        },
    },
    "allOf": [
        {"if": {"properties": {"task": {"enum": ["dispersion"]}}},
         "then": {"required": ["device", "grid"]}},
        {"if": {"properties": {"task": {"enum": ["spectrum", "loss_sweep"]}}},
         "then": {"required": ["device", "pump", "grid"]}},
        {"if": {"properties": {"task": {"const": "tune"}}},
         "then": {"required": ["device", "pump", "grid", "tune"]}},
        {"if": {"properties": {"task": {"const": "loss_sweep"}}}, "then": {"required": ["loss_sweep"]}},
        {"if": {"properties": {"task": {"const": "two_qubit"}}},
         "then": {"required": ["device", "pump", "two_qubit"]}},
        {"if": {"properties": {"task": {"const": "cluster"}}}, "then": {"required": ["cluster"]}},
    ],
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _pointer(path):
    return "/" + "/".join(str(p) for p in path)


def validate(data):
    """Raise :class:`ConfigError` with a JSON pointer for the first schema violation."""
    err = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(data))
    if err is not None:
        raise ConfigError(err.message, _pointer(err.absolute_path))
    return data


def load(path):
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return validate(data)


def build_device(spec) -> JtwpaDevice:
    line = spec["line"]
    if "omega_p" in line and "plasma_frequency_hz" in line:
        raise ConfigError("give omega_p or plasma_frequency_hz, not both", "/device/line")
    if "omega_p" in line:
        omega_p = line["omega_p"]
    elif "plasma_frequency_hz" in line:
        omega_p = 2 * math.pi * line["plasma_frequency_hz"]
    else:
        raise ConfigError("missing omega_p or plasma_frequency_hz", "/device/line")
    a = line.get("a", 1e-5)
    if "z0" in line:
        params = LineParams.from_junctions(line["n_cells"], line["z0"], line["i_c"], omega_p, a)
    else:
        params = LineParams(line["n_cells"], a, line["c"], line["l"], omega_p, line["i_c"])
    resonators = []
    for i, r in enumerate(spec.get("resonators", [])):
        if "l_r" in r:
            resonators.append(ResonatorSpec(r["c_c"], r["c_r"], r["l_r"]))
        else:
            resonators.append(ResonatorSpec.from_frequency(2 * math.pi * r["frequency_hz"], r["c_c"], r["c_r"]))
    if "comb" in spec:
        if not resonators:
            raise ConfigError("a comb needs a base resonator", "/device/comb")
        comb = spec["comb"]
        resonators += comb_resonators(resonators[0], comb["count"], comb["spacing_fraction"],
                                      comb["coupling_scale"])
    try:
        return JtwpaDevice(params, tuple(resonators))
    except ValueError as exc:
        raise ConfigError(str(exc), "/device/resonators") from exc


def build_pump(spec, device) -> PumpConfig:
    omega = spec["omega_pump"] if "omega_pump" in spec else 2 * math.pi * spec["frequency_hz"]
    i_c = device.line.i_c
    if "beta" in spec:
        pump = PumpConfig(omega, spec["beta"], spec.get("i_pump"))
        try:
            pump.check_current(i_c)
        except ValueError as exc:
            raise ConfigError(str(exc), "/pump") from exc
        return pump
    beta = spec["i_pump"] / (4 * i_c)
    if not beta < 1:
        raise ConfigError("i_pump/(4 i_c) must be below 1", "/pump/i_pump")
    return PumpConfig.from_current(omega, spec["i_pump"], i_c)


def build_grid(spec):
    if "omega_min" in spec:
        lo, hi = spec["omega_min"], spec["omega_max"]
    else:
        lo, hi = 2 * math.pi * spec["f_min_hz"], 2 * math.pi * spec["f_max_hz"]
    if not lo < hi:
        raise ConfigError("grid minimum must be below maximum", "/grid")
    return np.linspace(lo, hi, spec["points"])


def build_loss(spec):
    return None if spec is None or spec["eta"] == 1 else LossModel(spec["eta"])


def build_range(spec):
    return np.linspace(spec["start"], spec["stop"], spec["num"])


def shipped_dir():
    return resources.files("jtwpa") / "configs"


def shipped_configs():
    return sorted(p.name for p in shipped_dir().iterdir() if p.name.endswith(".json"))


def resolve(path_or_name):
    """Path on disk, or the name of a shipped configuration."""
    p = Path(path_or_name)
    if p.exists():
        return p
    candidate = shipped_dir() / p.name
    if candidate.is_file():
        return Path(str(candidate))
    return p
