"""Batch front door: config ingestion, subcommands, deterministic emission.

Exit codes: 0 success, 1 failed verification, 2 configuration or validation
error, 3 stable regime (theta at or above the computed threshold), 4
numerical failure. Output files are byte-stable across runs and --jobs
settings: floats are serialized with shortest round-trip repr, field order is
fixed, newlines are '\n'.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, oracle, spectrum
from .errors import ConfigError, SolverError, StableRegime
from .fixedpoint import solve_lambda
from .model import FluidConfig, validate_config
from .pencil import Discretization

EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_STABLE = 3
EXIT_NUMERICAL = 4

COMMANDS = (
    "growth",
    "alpha-curve",
    "dispersion-curve",
    "sweep-theta",
    "verify",
    "oracle-compare",
)
DEFAULT_THETA_GRID = "0,0.25,0.5,0.75,0.9,0.99"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rtgrowth",
        description="Largest growth rate of linear Rayleigh-Taylor instability "
        "for two stratified viscous fluid layers with surface tension.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="path to FluidConfig JSON")
    p.add_argument("--out", default=None, help="output path (stdout when omitted)")
    p.add_argument("--resolution", type=int, default=128, help="elements per layer")
    p.add_argument("--tol", type=float, default=1e-8, help="fixed-point tolerance")
    p.add_argument(
        "--theta-grid",
        default=DEFAULT_THETA_GRID,
        help="comma-separated fractions of theta_c for sweep-theta",
    )
    p.add_argument("--s-grid", default=None, help="comma-separated s values for alpha-curve")
    p.add_argument("--kmax", type=float, default=None, help="mode cutoff override")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers per stage")
    p.add_argument(
        "--mode-table",
        default=None,
        help="with growth: also write the per-mode alpha table CSV here",
    )
    return p


def _parse_grid(text: str, name: str) -> np.ndarray:
    try:
        values = np.asarray([float(x) for x in text.split(",") if x.strip() != ""])
    except ValueError as exc:
        raise ConfigError(f"unparseable {name}: {exc}") from exc
    if values.size == 0:
        raise ConfigError(f"{name} is empty")
    return values


def _load_config(path: str) -> FluidConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    try:
        cfg = FluidConfig.from_json(text)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"malformed config {path!r}: {exc}") from exc
    return validate_config(cfg)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    try:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write output {out!r}: {exc}") from exc


def _cmd_growth(cfg, args) -> int:
    disc = Discretization(args.resolution)
    result = solve_lambda(cfg, disc, tol_fp=args.tol, jobs=args.jobs)
    _emit(json.dumps(result.to_json_dict()), args.out)
    if args.mode_table:
        _emit("\n".join(result.alpha_at_lambda.table.csv_lines()), args.mode_table)
    return 0


def _cmd_alpha_curve(cfg, args) -> int:
    if args.s_grid is None:
        raise ConfigError("alpha-curve requires --s-grid")
    s_grid = _parse_grid(args.s_grid, "--s-grid")
    disc = Discretization(args.resolution)
    frozen = None
    if args.kmax is not None:
        frozen = spectrum.FrozenModeSet.freeze(cfg, disc, args.kmax, jobs=args.jobs)
    curve = spectrum.alpha_curve(cfg, s_grid, disc, frozen=frozen, jobs=args.jobs)
    if args.format == "json":
        payload = {
            "s": list(map(float, curve.s)),
            "alpha": [v.alpha for v in curve.values],
            "argmax_k": [v.argmax_k for v in curve.values],
            "branch": [v.branch for v in curve.values],
            "zero_bracket": curve.zero_bracket,
        }
        _emit(json.dumps(payload), args.out)
    else:
        _emit("\n".join(curve.csv_lines()), args.out)
    return 0


def _comparison_ks(cfg, args) -> np.ndarray:
    k_max = args.kmax
    modes = None
    if k_max is not None:
        modes = spectrum.enumerate_modes(cfg, k_max)
        return modes.magnitudes
    # default: the twelve smallest lattice magnitudes
    k_try = 4.0 * spectrum.smallest_magnitude(cfg)
    while True:
        modes = spectrum.enumerate_modes(cfg, k_try)
        if len(modes) >= 12:
            return modes.magnitudes[:12]
        k_try *= 2.0


def _cmd_compare(cfg, args) -> int:
    disc = Discretization(args.resolution)
    ks = _comparison_ks(cfg, args)
    rows = oracle.compare_modes(cfg, ks, disc)
    if args.format == "json":
        payload = [
            {
                "k": r.k,
                "lambda_oracle": r.lambda_oracle,
                "lambda_variational": r.lambda_variational,
                "rel_diff": r.rel_diff,
            }
            for r in rows
        ]
        _emit(json.dumps(payload), args.out)
    else:
        _emit("\n".join(oracle.comparison_csv_lines(rows)), args.out)
    return 0


def _cmd_sweep(cfg, args) -> int:
    fractions = _parse_grid(args.theta_grid, "--theta-grid")
    if np.any(fractions < 0.0) or np.any(fractions >= 1.0):
        raise ConfigError("--theta-grid fractions must lie in [0, 1)")
    disc = Discretization(args.resolution)
    sweep = analysis.sweep_theta(cfg, fractions, disc, tol_fp=args.tol, jobs=args.jobs)
    if args.format == "json":
        payload = {
            "rows": [
                dict(
                    zip(
                        ("theta", "theta_over_theta_c", "lambda", "bound_m", "argmax_k", "residual"),
                        (float(t), float(t / sweep.theta_c), float(l), float(m), float(k), float(r)),
                    )
                )
                for t, l, m, k, r in zip(
                    sweep.thetas, sweep.lambdas, sweep.bounds_m, sweep.argmax_ks, sweep.residuals
                )
            ],
            "report": sweep.report(),
        }
        _emit(json.dumps(payload), args.out)
    else:
        _emit("\n".join(sweep.csv_lines()), args.out)
        report_path = (args.out + ".report.json") if args.out else None
        _emit(sweep.report_json(), report_path)
    return 0


def _cmd_verify(cfg, args) -> int:
    disc = Discretization(args.resolution)
    report = analysis.verify_all(cfg, disc, tol_fp=args.tol, jobs=args.jobs)
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        sys.stdout.write(f"{status} {check.name}: {check.detail}\n")
    if args.out:
        _emit(json.dumps(report.to_json_dict()), args.out)
    return 0 if report.all_pass else EXIT_VERIFY_FAILED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.resolution < 8:
            raise ConfigError(f"--resolution must be >= 8, got {args.resolution}")
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
        cfg = _load_config(args.config)
        if args.command == "growth":
            return _cmd_growth(cfg, args)
        if args.command == "alpha-curve":
            return _cmd_alpha_curve(cfg, args)
        if args.command in ("dispersion-curve", "oracle-compare"):
            return _cmd_compare(cfg, args)
        if args.command == "sweep-theta":
            return _cmd_sweep(cfg, args)
        if args.command == "verify":
            return _cmd_verify(cfg, args)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except StableRegime as exc:
        sys.stderr.write(f"stable regime: {exc}\n")
        return EXIT_STABLE
    except SolverError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
