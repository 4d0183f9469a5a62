"""Experiment configuration: one schema for flat key=value files and JSON.

Every value is coerced through the schema before any computation, and
keys the chosen experiment does not know are rejected.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import ConfigError

EXPERIMENTS = ("catalog", "render", "classify", "circle-stats", "periodic",
               "boundary-class", "dimension", "probe")


def _int(v):
    if isinstance(v, bool):
        raise ValueError("expected an integer")
    if isinstance(v, float) and not v.is_integer():
        raise ValueError("expected an integer")
    return int(v)


def _float(v):
    if isinstance(v, bool):
        raise ValueError("expected a number")
    return float(v)


def _str(v):
    if not isinstance(v, str):
        raise ValueError("expected a string")
    return v


def _bool(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.lower() in ("true", "yes", "1", "false", "no", "0"):
        return v.lower() in ("true", "yes", "1")
    raise ValueError("expected true or false")


def _complex(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    if isinstance(v, bool):
        raise ValueError("expected a complex number")
    return complex(v)


def _list_of(conv, length=None):
    def parse(v):
        if isinstance(v, str):
            v = [p for p in v.replace(";", ",").split(",") if p.strip()]
        if not isinstance(v, (list, tuple)):
            raise ValueError("expected a list")
        out = [conv(x.strip() if isinstance(x, str) else x) for x in v]
        if length is not None and len(out) != length:
            raise ValueError(f"expected {length} values, got {len(out)}")
        return out
    parse.__name__ = f"list[{conv.__name__}]"
    return parse


COMMON = {
    "experiment": (_str, None),
    "seed": (_int, 0),
    "threads": (_int, 0),  # 0 means hardware parallelism
    "out_dir": (_str, "."),
    "name": (_str, ""),
}

MAP_KEYS = {"map": (_str, None), "alpha": (_float, None)}
INNER_KEYS = {"inner": (_str, None), "lam": (_float, 2.0), "sign": (_int, 1)}

SCHEMA = {
    "catalog": {},
    "render": {**MAP_KEYS,
               "window": (_list_of(_float, 4), [-5.0, 15.0, -10.0, 10.0]),
               "resolution": (_list_of(_int, 2), [800, 800]),
               "n_max": (_int, 500), "escape_radius": (_float, 1e6),
               "bounded_radius": (_float, 1e3), "persistence": (_int, 5),
               "use_absorbing": (_bool, True)},
    "classify": {**MAP_KEYS, "starts": (_list_of(_complex), None), "depth": (_int, 64),
                 "probe_budget": (_int, 64 * 128)},
    "circle-stats": {**INNER_KEYS, "samples": (_int, 100_000), "n": (_int, 1000),
                     "arc_eps": (_float, 1e-3), "arc": (_list_of(_float, 2), None),
                     "recurrence_n": (_int, None)},
    "periodic": {**MAP_KEYS, "region": (_list_of(_float, 4), None),
                 "grid": (_list_of(_int, 2), [3, 8]), "max_period": (_int, 1),
                 "count": (_int, 20), "budget": (_int, 24)},
    "boundary-class": {**MAP_KEYS, "window": (_list_of(_float, 4), None), "count": (_int, 20),
                       "horizon": (_int, 500), "radius": (_float, 50.0)},
    "dimension": {"b1": (_float, None), "b2": (_float, None), **MAP_KEYS,
                  "base": (_complex, None), "base_radius": (_float, None),
                  "chains": (_list_of(_complex), None), "chain_length": (_int, 1)},
    "probe": {**INNER_KEYS, "depth": (_int, 6), "budget": (_int, 100_000),
              "eps": (_float, 0.01), "target": (_float, 0.3),
              "windows": (_list_of(_float), [10.0, 100.0, 1000.0]), "count": (_int, 1)},
}

# keys that do not influence results and are kept out of the config hash
NON_SEMANTIC = ("threads", "out_dir", "name")


def parse_text(text: str) -> dict:
    """Raw key/value pairs from a key=value file or a JSON object."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("JSON config must be an object")
        return raw
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        k, v = (p.strip() for p in line.split("=", 1))
        if k in raw:
            raise ConfigError(f"line {lineno}: duplicate key {k!r}")
        raw[k] = v
    return raw


def validate(raw: dict, experiment: str | None = None) -> dict:
    raw = dict(raw)
    exp = experiment or raw.get("experiment")
    if exp is None:
        raise ConfigError("missing key 'experiment'")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}; expected one of {', '.join(EXPERIMENTS)}")
    if "experiment" in raw and raw["experiment"] != exp:
        raise ConfigError(f"config is for {raw['experiment']!r}, not {exp!r}")
    schema = {**COMMON, **SCHEMA[exp]}
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) for {exp}: {', '.join(unknown)}; "
                          f"allowed: {', '.join(sorted(schema))}")
    cfg = {}
    for key, (conv, default) in schema.items():
        if key in raw and raw[key] is not None:
            try:
                cfg[key] = conv(raw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key!r}: {raw[key]!r} ({exc})") from exc
        else:
            cfg[key] = default
    cfg["experiment"] = exp
    if cfg["threads"] < 0:
        raise ConfigError("threads must be >= 0")
    if not cfg["name"]:
        cfg["name"] = exp
    return cfg


def load(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return validate(parse_text(text))


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def canonical(cfg: dict) -> dict:
    return {k: _jsonable(v) for k, v in sorted(cfg.items()) if k not in NON_SEMANTIC}


def config_hash(cfg: dict) -> str:
    blob = json.dumps(canonical(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
