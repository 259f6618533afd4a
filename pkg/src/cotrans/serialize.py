"""Experiment spec schemas, loaders and stable JSON output."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any

import jsonschema
import numpy as np

from .cotranslation import Cotranslation
from .errors import SchemaError
from .gallery import NAMES, build_example
from .groups import presentation_from_json
from .transforms import space_from_json, transform_from_json

_matrix = {"type": "array", "items": {"type": "array", "items": {"type": ["number", "string"]}}}
_presentation = {
    "type": "object",
    "required": ["family"],
    "properties": {
        "family": {"enum": ["cyclic", "dihedral", "infinite_dihedral", "free", "integers", "free_product"]},
    },
}
_common = {
    "seed": {"type": "integer"},
    "tol": {"type": "number", "exclusiveMinimum": 0},
    "radius": {"type": "integer", "minimum": 0},
    "testpoints": {"type": "integer", "minimum": 1},
}
_cotranslation = {
    "oneOf": [
        {"required": ["example"]},
        {"required": ["presentation", "space", "generators"]},
    ],
    "properties": {
        "example": {"enum": list(NAMES)},
        "params": {"type": "object"},
        "presentation": _presentation,
        "space": {"type": "object", "required": ["kind"]},
        "generators": {"type": "object"},
    },
}


def _schema(*parts: dict, required=()) -> dict:
    props = dict(_common)
    out: dict[str, Any] = {"type": "object", "required": ["seed", *required]}
    all_of = []
    for p in parts:
        props.update(p.get("properties", {}))
        rest = {k: v for k, v in p.items() if k != "properties"}
        if rest:
            all_of.append(rest)
    out["properties"] = props
    if all_of:
        out["allOf"] = all_of
    return out


_generator_spec = {
    "oneOf": [
        {"enum": ["zero", "rotation", "time_rotation", "sin_cos", "diag_t"]},
        {"type": "object", "required": ["constant"], "properties": {"constant": _matrix}},
        {"type": "object", "required": ["polynomial"]},
    ]
}
_partial_common = {
    "properties": {
        "presentation": _presentation,
        "d": {"type": "integer", "minimum": 1},
        "partial": {"type": "object"},
        "elements": {"type": "array", "items": {"type": "string"}},
    }
}

SCHEMAS = {
    "verify-groupoid": _schema(
        {"anyOf": [{"required": ["presentation"]}, {"required": ["example"]}], "properties": _cotranslation["properties"]}
    ),
    "verify-cotranslation": _schema(_cotranslation),
    "check-relations": _schema(_cotranslation),
    "skew-verify": _schema(_cotranslation),
    "evaluate": _schema(
        _cotranslation,
        {"properties": {"g": {"type": "string"}, "h": {"type": "string"}, "points": {"type": "array"}}},
        required=("g", "h"),
    ),
    "difference": _schema(
        {
            "properties": {
                "sequence": {"type": "object"},
                "triples": {"type": "integer", "minimum": 1},
                "span": {"type": "integer", "minimum": 0},
                "reach": {"type": "integer", "minimum": 0},
            }
        },
        required=("sequence",),
    ),
    "evolve": _schema(
        {"properties": {"generator": _generator_spec, "step": {"type": "number", "exclusiveMinimum": 0}}},
        required=("generator",),
    ),
    "derivative-identities": _schema(
        {
            "properties": {
                "generator": _generator_spec,
                "step": {"type": "number", "exclusiveMinimum": 0},
                "h": {"type": "number", "exclusiveMinimum": 0},
                "grid": {"type": "integer", "minimum": 1},
            }
        },
        required=("generator",),
    ),
    "partial-verify": _schema(_partial_common, required=("presentation", "d", "partial")),
    "complete": _schema(_partial_common, required=("presentation", "d", "partial")),
    "factorize": _schema(_partial_common, required=("presentation", "d", "partial")),
}


def validate(command: str, spec: Any) -> None:
    try:
        jsonschema.validate(spec, SCHEMAS[command])
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {e.message}") from None


def cotranslation_from_spec(spec: dict) -> Cotranslation:
    """Build from ``{"example", "params"}`` or explicit generator maps.

    Explicit maps: ``generators[symbol]`` is a transform (the same at every
    base) or ``{"table": {word: transform}}``.
    """
    if "example" in spec:
        return build_example(spec["example"], spec.get("params"))
    P = presentation_from_json(spec["presentation"])
    space = space_from_json(spec["space"])
    gens = []
    for sym in P.generators:
        try:
            g = spec["generators"][sym]
        except KeyError:
            raise SchemaError(f"generators: no map for {sym!r}") from None
        if "table" in g:
            gens.append({k: transform_from_json(v, space) for k, v in g["table"].items()})
        else:
            t = transform_from_json(g, space)
            gens.append(lambda eta, t=t: t)
    return Cotranslation(P, space, gens, name=spec.get("name", "from spec"))


def _default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(o):
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def dumps(payload: Any) -> str:
    """UTF-8 safe, sorted keys, two-space indent, trailing newline."""
    payload = json.loads(json.dumps(payload, default=_default))
    return json.dumps(_clean(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def matrix_json(M) -> list:
    M = np.asarray(M)
    if np.iscomplexobj(M):
        return [[[float(x.real), float(x.imag)] for x in row] for row in M]
    return [[float(x) for x in row] for row in M]
