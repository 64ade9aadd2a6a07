"""Scenario files (schema "rcnwave/1") and their translation into library objects."""
from __future__ import annotations

import json
import math
import os
from typing import Optional

import jsonschema
import numpy as np

from .errors import ScenarioError
from .geometry import KINDS, MARKERS, RadialPotential
from .wave import WaveScenario, gaussian_pulse

SCHEMA_VERSION = "rcnwave/1"

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}

_radial_fn = {
    "type": "object",
    "additionalProperties": False,
    "required": ["type"],
    "properties": {
        "type": {"enum": ["zero", "constant", "power", "minorant_multiple"]},
        "coefficient": _num,
        "exponent": _num,
    },
}

_profile = {
    "type": "object",
    "additionalProperties": False,
    "required": ["shape"],
    "properties": {
        "shape": {"enum": ["zero", "polynomial_bump", "gaussian_bump", "piecewise_linear", "gaussian_pulse"]},
        "center": _num,
        "width": _pos,
        "amplitude": _num,
        "coordinate": {"enum": ["grid", "r"]},
    },
}

_boundary = {
    "type": "object",
    "additionalProperties": False,
    "required": ["type"],
    "properties": {"type": {"enum": ["dirichlet_zero", "excised_cutoff"]}, "r_cut": _pos},
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema", "potential"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "potential": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(KINDS)},
                "params": {"type": "object", "additionalProperties": _num},
                "dimension": {"type": "integer", "minimum": 1},
                "region": {"enum": ["inner", "outer"]},
                "v_plus": _radial_fn,
                "v_minus": _radial_fn,
                "v_minus_equals_q": {"type": "boolean"},
                "table": {
                    "type": "object", "additionalProperties": False, "required": ["r", "q"],
                    "properties": {"r": {"type": "array", "items": _num},
                                   "q": {"type": "array", "items": _num}},
                },
                "domain": {
                    "type": "object", "additionalProperties": False,
                    "properties": {"lo": _num, "hi": _num,
                                   "markers": {"type": "array", "items": {"enum": list(MARKERS)}}},
                },
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["lo", "hi", "cells"],
            "properties": {
                "coordinate": {"enum": ["r", "tau"]},
                "lo": _num, "hi": _num,
                "cells": {"type": "integer", "minimum": 2},
                "r_ref": _num,
                "operator": {"enum": ["schrodinger", "lorentzian"]},
            },
        },
        "boundary": {
            "type": "object", "additionalProperties": False,
            "properties": {"inner": _boundary, "outer": _boundary},
        },
        "time": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t_end"],
            "properties": {"t_end": {"type": "number", "minimum": 0},
                           "cfl_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
        },
        "initial": {
            "type": "object", "additionalProperties": False,
            "properties": {"u0": _profile, "v0": _profile},
        },
        "source": {
            "type": "object", "additionalProperties": False,
            "required": ["profile"],
            "properties": {"profile": _profile, "frequency": _num},
        },
        "checks": {
            "type": "array",
            "items": {
                "type": "object", "additionalProperties": False, "required": ["type"],
                "properties": {"type": {"enum": ["cone", "silo", "energy", "excision"]},
                               "params": {"type": "object"}},
            },
        },
        "outputs": {
            "type": "object", "additionalProperties": False,
            "properties": {"dir": {"type": "string"},
                           "snapshot_every": {"type": "integer", "minimum": 1}},
        },
    },
}


def _unknown_key(err: jsonschema.ValidationError) -> Optional[str]:
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        if extra:
            return extra[0]
    return None


def validate(doc: dict) -> dict:
    """Validate a scenario document; ScenarioError names the offending key."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        key = _unknown_key(err)
        if key is not None:
            raise ScenarioError(f"unknown key {key!r} at {where}")
        raise ScenarioError(f"invalid scenario at {where}: {err.message}")
    _check_finite(doc, "")
    return doc


def _check_finite(obj, where):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ScenarioError(f"non-finite number at {where or '<root>'}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{where}/{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _check_finite(v, f"{where}/{i}")


def load(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return validate(doc)


def _radial(spec: Optional[dict], q=None):
    if spec is None or spec["type"] == "zero":
        return None
    c = float(spec.get("coefficient", 1.0))
    t = spec["type"]
    if t == "constant":
        return lambda r: c + 0.0 * r
    if t == "power":
        k = float(spec.get("exponent", 0.0))
        return lambda r: c * r ** k
    return lambda r: c * q(r)


def build_potential(doc: dict) -> RadialPotential:
    spec = doc["potential"]
    dom = spec.get("domain", {})
    table = spec.get("table")
    kw = dict(
        kind=spec["kind"],
        params=dict(spec.get("params", {})),
        dimension=spec.get("dimension", 3),
        v_minus_equals_q=spec.get("v_minus_equals_q", False),
        domain=(dom.get("lo"), dom.get("hi")),
        markers=frozenset(dom.get("markers", [])),
        table=(table["r"], table["q"]) if table else None,
        region=spec.get("region", "outer"),
    )
    try:
        base = RadialPotential(**kw)
        kw["v_plus"] = _radial(spec.get("v_plus"), base.q)
        kw["v_minus"] = _radial(spec.get("v_minus"), base.q)
        return RadialPotential(**kw)
    except (ValueError, KeyError) as exc:
        raise ScenarioError(f"invalid potential: {exc}") from exc


def profile_fn(spec: Optional[dict]):
    """Callable for an initial-data or source profile (support [center -+ width/2])."""
    if spec is None or spec["shape"] == "zero":
        return None
    from .forms import TestProfile

    c = float(spec.get("center", 0.0))
    w = float(spec.get("width", 1.0))
    amp = float(spec.get("amplitude", 1.0))
    if spec["shape"] == "gaussian_pulse":
        return gaussian_pulse(c, w, amp)
    prof = TestProfile(spec["shape"], (c - w / 2, c + w / 2), amplitude=amp)
    return prof


def build_wave(doc: dict, p: Optional[RadialPotential] = None) -> WaveScenario:
    if "grid" not in doc or "time" not in doc:
        raise ScenarioError("simulation scenarios need 'grid' and 'time'")
    p = p or build_potential(doc)
    g, t = doc["grid"], doc["time"]
    b = doc.get("boundary", {})
    ini = doc.get("initial", {})
    u0s, v0s = ini.get("u0"), ini.get("v0")
    coords = {s.get("coordinate", "grid") for s in (u0s, v0s) if s and s["shape"] != "zero"}
    if len(coords) > 1:
        raise ScenarioError("u0 and v0 must use the same coordinate")
    src = None
    if "source" in doc:
        shape = profile_fn(doc["source"]["profile"])
        om = float(doc["source"].get("frequency", 0.0))
        if shape is not None:
            src = lambda tt, r: np.cos(om * tt) * shape(r)
    inner, outer = b.get("inner", {"type": "dirichlet_zero"}), b.get("outer", {"type": "dirichlet_zero"})
    try:
        return WaveScenario(
            potential=p, lo=g["lo"], hi=g["hi"], cells=g["cells"], t_end=t["t_end"],
            coordinate=g.get("coordinate"), cfl_fraction=t.get("cfl_fraction", 0.5),
            u0=profile_fn(u0s), v0=profile_fn(v0s), source=src,
            inner=inner["type"], outer=outer["type"],
            r_cut_inner=inner.get("r_cut"), r_cut_outer=outer.get("r_cut"),
            snapshot_every=doc.get("outputs", {}).get("snapshot_every", 1),
            operator=g.get("operator"), r_ref=g.get("r_ref"),
            profile_coordinate=coords.pop() if coords else "grid",
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def output_dir(doc: dict, default: str = "rcnwave_out") -> str:
    env = os.environ.get("RCNWAVE_OUT")
    if env:
        return env
    return doc.get("outputs", {}).get("dir", default)
