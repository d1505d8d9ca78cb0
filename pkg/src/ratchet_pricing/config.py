"""JSON run configuration: schemas, loading, hashing."""

from __future__ import annotations

import hashlib
import json
import sys
from typing import Any

import jsonschema

from .errors import ValidationError
from .model import MarketParams

_NUM = {"type": "number"}
_PROB_LIST = {"type": "array", "items": {"type": "number"}}

MARKET_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["c", "d_low", "d_high"],
    "properties": {
        "c": _NUM,
        "d_low": _NUM,
        "d_high": _NUM,
        "gammas": {"type": "array", "items": _NUM, "minItems": 2},
        "q": _NUM,
        "T": {"type": "integer", "minimum": 2},
        "truncated": {"type": "boolean"},
        "exponent_a": {"type": "number", "exclusiveMinimum": 0},
    },
    "oneOf": [{"required": ["gammas"], "not": {"required": ["q"]}}, {"required": ["q", "T"], "not": {"required": ["gammas"]}}],
}

_GRID_POINTS = {"type": "integer", "minimum": 201}
_POLICY = {"enum": ["flexible", "regulated_closed_form", "regulated_tabulated"]}
_SEED = {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}


def _obj(required, **props):
    return {"type": "object", "additionalProperties": False, "required": list(required), "properties": props}


SCHEMAS: dict[str, dict] = {
    "solve": _obj(["market"], market=MARKET_SCHEMA, oracle={"type": "boolean"}, grid_points=_GRID_POINTS),
    "verify": _obj(
        [],
        grid_points=_GRID_POINTS,
        oracle_tolerance={"type": "number", "exclusiveMinimum": 0},
        checks={"type": "array", "items": {"type": "string"}},
        tolerances={"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
    ),
    "sweep": {
        "oneOf": [
            _obj(
                ["kind", "q_grid", "a_grid"],
                kind={"const": "delta"},
                q_grid=_PROB_LIST,
                a_grid=_PROB_LIST,
                T={"type": "integer", "minimum": 2, "maximum": 20},
                d_high=_NUM,
                d_low=_NUM,
                grid_points=_GRID_POINTS,
            ),
            _obj(
                ["kind", "market", "gamma2_grid"],
                kind={"const": "price_gap"},
                market=MARKET_SCHEMA,
                gamma2_grid=_PROB_LIST,
                kappa_grid=_PROB_LIST,
            ),
        ]
    },
    "simulate": _obj(
        ["market", "replications", "seed"],
        market=MARKET_SCHEMA,
        policy=_POLICY,
        replications={"type": "integer", "minimum": 1},
        seed=_SEED,
        grid_points=_GRID_POINTS,
    ),
    "synth": _obj(
        ["market", "seed", "stations", "days", "reform_day"],
        market=MARKET_SCHEMA,
        policy={"enum": ["regulated_closed_form", "regulated_tabulated"]},
        seed=_SEED,
        stations={"type": "integer", "minimum": 1},
        days={"type": "integer", "minimum": 1},
        reform_day={"type": "integer", "minimum": 1},
        noise_sd={"type": "number", "minimum": 0},
        start_date={"type": "string"},
        grid_points=_GRID_POINTS,
    ),
    "empirics": _obj(
        ["input", "reform_instant"],
        input={"type": "string"},
        reform_instant={"type": "string"},
        report={"enum": ["hourly_diff", "box_whisker"]},
    ),
}


def load_json(source: str) -> Any:
    """Read JSON from a path, or from standard input when ``source`` is '-'."""
    if source == "-":
        text = sys.stdin.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from exc


def validate(command: str, config: Any) -> None:
    try:
        jsonschema.validate(config, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"config field {where}: {exc.message}") from None


def config_hash(config: Any) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def market_from_config(m: dict) -> MarketParams:
    if "gammas" in m:
        gammas = tuple(m["gammas"])
        T = m.get("T", len(gammas))
    else:
        T = m["T"]
        gammas = (m["q"],) * T
    return MarketParams(
        c=m["c"],
        d_low=m["d_low"],
        d_high=m["d_high"],
        gammas=gammas,
        T=T,
        truncated=m.get("truncated", True),
        exponent_a=m.get("exponent_a", 1.0),
    )
