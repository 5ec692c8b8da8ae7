"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on a
configuration or runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig
from .scenarios import ScenarioResult, run_scenario

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def emit_report(result: ScenarioResult, stream=None) -> int:
    """Print one line per check and return the exit code for the result."""
    stream = stream or sys.stdout
    if result.series is not None and len(result.series) == 0:
        print(f"{result.scenario}: no records", file=stream)
    for check in result.checks:
        print(check.line(), file=stream)
    verdict = "PASS" if result.passed else "FAIL"
    print(f"{result.scenario}: {verdict}", file=stream)
    return EXIT_OK if result.passed else EXIT_FAIL


def write_outputs(result: ScenarioResult, cfg: ExperimentConfig, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    if result.series is not None:
        result.series.to_csv(out / "series.csv")
    summary = result.summary_json()
    summary["config"] = cfg.to_dict()
    with open(out / "summary.json", "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, text in result.extra_csv.items():
        (out / name).write_text(text)


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    result = run_scenario(cfg)
    write_outputs(result, cfg, Path(args.out))
    return emit_report(result)


def _cmd_scan(args) -> int:
    nl = {"kind": "power_difference", "p": args.p, "q": args.q, "a_sub": args.a}
    cfg = ExperimentConfig.from_dict({"scenario": "c-star-scan", "nonlinearity": nl})
    result = run_scenario(cfg)
    print(f"c* = {result.summary['c_star']:.15g}")
    return emit_report(result)


def _cmd_spectral(args) -> int:
    if not args.c > 0:
        raise ConfigError("c0: must be a positive number")
    raw = {"scenario": "spectral-report"}
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
        base = ExperimentConfig.from_json(text).to_dict()
        raw.update({k: v for k, v in base.items()
                    if k in ("nonlinearity", "grid", "spectral", "tolerances")})
    else:
        L, N = 64.0, 1024
        while math.exp(-math.sqrt(args.c) * L / 2) >= 1e-12 and L < 2 ** 16:
            L, N = 2 * L, 2 * N
        raw["grid"] = {"L": L, "N": N}
    raw["c0"] = args.c
    cfg = ExperimentConfig.from_dict(raw)
    result = run_scenario(cfg)
    print(json.dumps(_jsonable(result.summary), indent=2, sort_keys=True))
    return emit_report(result)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gkdvlab", description="gKdV soliton lab")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a configured scenario")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.set_defaults(func=_cmd_run)
    scan = sub.add_parser("scan-cstar", help="threshold speed for u^p - a u^q")
    scan.add_argument("--p", type=int, required=True)
    scan.add_argument("--q", type=int, required=True)
    scan.add_argument("--a", type=float, required=True)
    scan.set_defaults(func=_cmd_scan)
    spec = sub.add_parser("spectral", help="spectral report for one speed")
    spec.add_argument("--c", type=float, required=True)
    spec.add_argument("--config")
    spec.set_defaults(func=_cmd_spectral)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
