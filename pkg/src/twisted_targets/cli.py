"""Command line entry point: `twisted-targets run --config PATH` or `twisted-targets <kind> [flags]`."""

from __future__ import annotations

import argparse
import json
import sys

from . import experiments
from .config import KINDS, SCHEMA_VERSION, ConfigError, load_config
from .errors import InvalidInput, Unsupported

EXIT_OK, EXIT_CONFIG, EXIT_VERDICT = 0, 2, 3


def _sequence_flag(text: str) -> dict:
    # poly:2, poly:2:3 (c n^d with d=2, c=3), geom:2, table:1,4,9
    family, _, rest = text.partition(":")
    if family in ("poly", "polynomial"):
        parts = rest.split(":") if rest else []
        d = int(parts[0]) if parts else 1
        c = int(parts[1]) if len(parts) > 1 else 1
        return {"family": "polynomial", "d": d, "c": c}
    if family in ("geom", "geometric"):
        return {"family": "geometric", "r": json.loads(rest or "2")}
    if family == "table":
        return {"family": "table", "values": [int(v) for v in rest.split(",")]}
    raise ConfigError("sequence", f"unknown sequence flag {text!r}")


def _psi_flag(text: str) -> dict:
    # power:0.8, power-log:1,2, exp:1, const:0
    family, _, rest = text.partition(":")
    try:
        args = [float(v) for v in rest.split(",")] if rest else []
        if family == "power":
            return {"family": "power", "sigma": args[0]}
        if family == "power-log":
            return {"family": "power-log", "sigma": args[0], "beta": args[1]}
        if family in ("exp", "exponential"):
            return {"family": "exponential", "rate": args[0]}
        if family in ("const", "constant"):
            return {"family": "constant", "value": args[0]}
    except IndexError:
        raise ConfigError("psi", f"missing parameters in {text!r}") from None
    raise ConfigError("psi", f"unknown psi flag {text!r}")


def _parse_set(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(key, "--set expects key=value")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def _inline_config(kind: str, ns) -> dict:
    raw: dict = {"schema_version": SCHEMA_VERSION, "kind": kind}
    if ns.sequence:
        raw["sequence"] = _sequence_flag(ns.sequence)
    if ns.psi:
        raw["psi"] = _psi_flag(ns.psi)
    elif ns.sigma is not None:
        raw["psi"] = {"family": "power", "sigma": ns.sigma}
    if ns.alpha:
        raw["alpha"] = {"values": list(ns.alpha)}
    elif ns.samples:
        raw["alpha"] = {"sample": {"measure": {"kind": "lebesgue"}, "count": ns.samples}}
    return raw


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=None, help="64-bit seed (overrides config)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--assert", dest="assert_", action="store_true",
                   help="exit 3 if any verdict fails")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="dotted config override with a JSON value, e.g. params.N=1000")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twisted-targets", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("--config", required=True)
    _common(run)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"quick {kind} run with inline flags")
        p.add_argument("--alpha", action="append", help="'sqrt2-1', 'golden', '1/3', '0.25', 'pi-3[512]'")
        p.add_argument("--samples", type=int, help="draw this many alphas uniformly instead")
        p.add_argument("--sequence", help="poly:D[:C], geom:R or table:v1,v2,...")
        p.add_argument("--psi", help="power:S, power-log:S,B, exp:R or const:V")
        p.add_argument("--sigma", type=float, help="shorthand for --psi power:SIGMA")
        _common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        overrides = _parse_set(ns.set)
        source = ns.config if ns.command == "run" else _inline_config(ns.command, ns)
        if ns.threads < 1:
            raise ConfigError("threads", "must be >= 1")
        cfg = load_config(source, seed=ns.seed, overrides=overrides)
        report = experiments.run(cfg, threads=ns.threads)
    except (ConfigError, Unsupported, InvalidInput) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = ns.out or cfg.out_dir or "out"
    path = experiments.write_report(report, out)
    for name, ok in report.verdicts.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"wrote {path}")
    if ns.assert_ and not report.passed:
        return EXIT_VERDICT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
