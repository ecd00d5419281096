"""Experiment configuration: JSON schema, validation and resolution into model objects."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .errors import InvalidInput, PrecisionError
from .fourier import measure_from_dict, sample_alphas
from .model import dimension_from_dict, psi_from_dict, sequence_from_dict
from .moments import BlockScheme
from .orbit import parse_alpha
from .targets import default_windows, quarter_windows
from .torus_arcs import ArcSet

SCHEMA_VERSION = 1

KINDS = (
    "orbit", "discrepancy", "independence", "chung-erdos", "moments", "tail-union",
    "limsup-profile", "hit-count", "local-density", "equid-ratio", "critical-exponent",
    "separation", "fourier-decay", "jarnik-table",
)

MAX_BLOCK_EXPONENT = 26

_family = {"type": "object", "required": ["family"], "properties": {"family": {"type": "string"}}}

SCHEMA = {
    "type": "object",
    "required": ["schema_version", "kind"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"enum": list(KINDS)},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "sequence": _family,
        "psi": _family,
        "dimension": _family,
        "alpha": {
            "type": "object",
            "oneOf": [
                {"required": ["values"]},
                {"required": ["sample"]},
            ],
            "properties": {
                "values": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "bits": {"type": "integer", "minimum": 1},
                "sample": {
                    "type": "object",
                    "required": ["measure", "count"],
                    "properties": {
                        "measure": {"type": "object", "required": ["kind"]},
                        "count": {"type": "integer", "minimum": 1},
                        "bits": {"type": "integer", "minimum": 1},
                    },
                },
            },
        },
        "blocks": {
            "type": "object",
            "properties": {
                "exponents": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2},
                "use": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
            },
        },
        "windows": {
            "oneOf": [
                {"enum": ["full", "quarters", "eighths", "full+quarters"]},
                {"type": "array", "minItems": 1, "items": {
                    "type": "array", "items": {"type": "array", "items": {"type": "number"},
                                               "minItems": 2, "maxItems": 2}}},
            ]
        },
        "schedule": {
            "type": "array", "minItems": 1,
            "items": {"type": "array", "items": {"type": "integer", "minimum": 1},
                      "minItems": 2, "maxItems": 2},
        },
        "tolerances": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
        "params": {"type": "object"},
        "outputs": {
            "type": "object",
            "properties": {"dir": {"type": "string"}, "plot": {"type": "boolean"}},
        },
    },
}


class ConfigError(InvalidInput):
    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path or '<root>'}: {message}")


DEFAULT_TOLERANCES = {
    "full_measure": 1e-3,
    "independence": 1e-10,
    "chung_erdos": 1e-12,
    "hit_ratio_lo": 0.5,
    "hit_ratio_hi": 2.0,
    "hit_fraction": 0.95,
}


@dataclass
class ExperimentConfig:
    kind: str
    raw: dict
    seed: int = 0
    sequence: object = None
    psi: object = None
    dimension: object = None
    alphas: list = field(default_factory=list)
    scheme: BlockScheme | None = None
    blocks: list[int] = field(default_factory=list)
    windows: list[tuple[str, ArcSet]] = field(default_factory=list)
    schedule: list[tuple[int, int]] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    out_dir: str | None = None
    plot: bool = False


def _windows(spec) -> list[tuple[str, ArcSet]]:
    full = [("full", ArcSet.full())]
    quarters = [(f"q{k}", U) for k, U in enumerate(quarter_windows())]
    if spec is None or spec == "full+quarters":
        return full + quarters
    if spec == "full":
        return full
    if spec == "quarters":
        return quarters
    if spec == "eighths":
        return [(f"e{k}", U) for k, U in enumerate(default_windows())]
    return [(f"w{k}", ArcSet.from_intervals(pairs)) for k, pairs in enumerate(spec)]


def _wrap(path: str, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except PrecisionError as exc:
        raise ConfigError(path, str(exc)) from exc
    except (InvalidInput, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


def load_config(source, seed: int | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Parse, validate and resolve a config given as dict, JSON text or file path."""
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        try:
            raw = json.loads(Path(source).read_text())
        except FileNotFoundError:
            raise ConfigError("", f"config file {source} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON: {exc}") from None
    elif isinstance(source, (str, Path)):
        raw = json.loads(str(source))
    else:
        raw = copy.deepcopy(source)
    if not isinstance(raw, dict) or not raw:
        raise ConfigError("", "empty configuration")
    for key, value in (overrides or {}).items():
        _set_path(raw, key, value)
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ConfigError("/".join(str(p) for p in e.absolute_path), e.message)

    cfg = ExperimentConfig(kind=raw["kind"], raw=raw)
    cfg.seed = int(seed if seed is not None else raw.get("seed", 0))
    cfg.sequence = _wrap("sequence", sequence_from_dict, raw.get("sequence", {"family": "polynomial"}))
    if "psi" in raw:
        cfg.psi = _wrap("psi", psi_from_dict, raw["psi"])
    cfg.dimension = _wrap("dimension", dimension_from_dict, raw.get("dimension"))
    cfg.alphas = _wrap("alpha", _alphas, raw.get("alpha", {"values": ["sqrt2-1"]}), cfg.seed)
    b = raw.get("blocks", {})
    exps = b.get("exponents")
    if exps is not None and max(exps) > MAX_BLOCK_EXPONENT:
        raise ConfigError("blocks/exponents", f"exponent above {MAX_BLOCK_EXPONENT} is out of computable range")
    cfg.scheme = _wrap("blocks/exponents", BlockScheme,
                       tuple(exps) if exps else tuple(range(MAX_BLOCK_EXPONENT + 1)))
    cfg.blocks = list(b.get("use", [5, 6, 7, 8, 9, 10]))
    for j in cfg.blocks:
        if j >= len(cfg.scheme):
            raise ConfigError("blocks/use", f"block {j} outside scheme with {len(cfg.scheme)} blocks")
    cfg.windows = _wrap("windows", _windows, raw.get("windows"))
    for name, U in cfg.windows:
        if U.is_empty():
            raise ConfigError("windows", f"window {name} has zero measure")
    sched = [tuple(x) for x in raw.get("schedule", [[1000, 100000]])]
    for i, (n, m) in enumerate(sched):
        if m < n:
            raise ConfigError(f"schedule/{i}", f"window [{n}, {m}] is empty")
    cfg.schedule = sched
    cfg.tolerances = {**DEFAULT_TOLERANCES, **raw.get("tolerances", {})}
    cfg.params = dict(raw.get("params", {}))
    out = raw.get("outputs", {})
    cfg.out_dir = out.get("dir")
    cfg.plot = bool(out.get("plot", False))
    return cfg


def _alphas(spec: dict, seed: int) -> list:
    bits = int(spec.get("bits", 256))
    if "values" in spec:
        return [parse_alpha(v, bits) for v in spec["values"]]
    s = spec["sample"]
    mu = measure_from_dict(s["measure"])
    # alpha draws get their own stream, independent of every other task
    sub = int(np.random.SeedSequence([seed, 0xA1FA]).generate_state(1, np.uint64)[0])
    return sample_alphas(mu, int(s["count"]), sub, int(s.get("bits", bits)))


def _set_path(d: dict, dotted: str, value):
    keys = dotted.split(".")
    for k in keys[:-1]:
        d = d.setdefault(k, {})
    d[keys[-1]] = value
