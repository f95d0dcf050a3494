"""Surface-tension sweeps: bound, monotonicity, continuity, vanishing limit.

Each sweep solves every point against one shared frozen mode set sized at
theta = 0 (the superset: larger theta only shrinks the unstable band), so the
cross-theta comparisons inherit exact monotonicity at the discrete level.
Continuity is certified empirically, through the proven ordering
Lambda(theta - delta) > Lambda(theta) > Lambda(theta + delta) plus a recorded
modulus; asserting a universal Lipschitz constant would claim more than the
theory provides.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import MonotonicityViolation, SolverError, StableRegime
from .fixedpoint import GrowthResult, solve_lambda
from .model import (
    FluidConfig,
    theta_critical,
    upper_bound_m,
    validate_config,
    wang_tice_bound,
)
from .modeforms import (
    check_trace_inequalities,
    threshold_test_profile,
    random_admissible_profile,
)
from .oracle import compare_modes
from .pencil import Discretization
from .spectrum import FrozenModeSet, alpha_curve, global_alpha, initial_cutoff


def _sized_mode_set(
    cfg: FluidConfig, disc: Discretization, tol_fp: float, jobs: int
) -> tuple[FrozenModeSet, GrowthResult]:
    """Solve at theta = 0 with escalation, then lock the resulting set."""
    cfg0 = cfg.with_theta(0.0)
    fm = FrozenModeSet.freeze(cfg0, disc, initial_cutoff(cfg0), jobs=jobs)
    res0 = solve_lambda(cfg0, disc, tol_fp=tol_fp, frozen=fm)
    fm.locked = True
    return fm, res0


@dataclass(frozen=True, eq=False)
class ThetaSweep:
    """Growth rates over an increasing theta grid, with bounds and diagnostics."""

    thetas: np.ndarray
    theta_c: float
    wang_tice: float
    lambdas: np.ndarray
    bounds_m: np.ndarray
    argmax_ks: np.ndarray
    residuals: np.ndarray
    results: list[GrowthResult] = field(repr=False)

    def csv_lines(self) -> list[str]:
        lines = ["theta,theta_over_theta_c,lambda,bound_m,argmax_k,residual"]
        for th, lam, m, k, r in zip(
            self.thetas, self.lambdas, self.bounds_m, self.argmax_ks, self.residuals
        ):
            lines.append(
                f"{float(th)!r},{float(th / self.theta_c)!r},{float(lam)!r},"
                f"{float(m)!r},{float(k)!r},{float(r)!r}"
            )
        return lines

    def report(self) -> dict:
        lam = self.lambdas
        return {
            "theta_c": self.theta_c,
            "wang_tice_bound": self.wang_tice,
            "strictly_decreasing": bool(np.all(np.diff(lam) < 0.0)),
            "all_positive": bool(np.all(lam > 0.0)),
            "bounded_by_m": bool(np.all(lam <= self.bounds_m * (1.0 + 1e-6))),
            "m_below_wang_tice": bool(np.all(self.bounds_m <= self.wang_tice * (1.0 + 1e-12))),
        }

    def report_json(self) -> str:
        return json.dumps(self.report())


def sweep_theta(
    cfg: FluidConfig,
    fractions,
    disc: Discretization,
    tol_fp: float = 1e-8,
    jobs: int = 1,
    frozen: FrozenModeSet | None = None,
) -> ThetaSweep:
    """Solve Lambda over theta = fractions * theta_c on one frozen mode set."""
    validate_config(cfg)
    fractions = np.asarray(fractions, dtype=float)
    if fractions.ndim != 1 or fractions.size == 0:
        raise ValueError("fractions must be a non-empty 1-d sequence")
    if not (np.all(fractions >= 0.0) and np.all(fractions < 1.0)):
        raise ValueError("fractions must lie in [0, 1): theta_c itself is stable")
    if fractions.size > 1 and not np.all(np.diff(fractions) > 0.0):
        raise ValueError("fractions must be strictly increasing")
    theta_c = theta_critical(cfg)

    if frozen is None:
        fm, res0 = _sized_mode_set(cfg, disc, tol_fp, jobs)
    else:
        fm, res0 = frozen, None

    results: list[GrowthResult] = []
    for f in fractions:
        if f == 0.0 and res0 is not None:
            results.append(res0)
            continue
        results.append(
            solve_lambda(cfg.with_theta(f * theta_c), disc, tol_fp=tol_fp, frozen=fm)
        )

    lambdas = np.asarray([r.lam for r in results])
    if lambdas.size > 1 and not np.all(np.diff(lambdas) < 0.0):
        raise MonotonicityViolation(
            "growth rate failed to decrease strictly along the theta sweep; "
            "the mode set must be frozen across points"
        )
    return ThetaSweep(
        thetas=fractions * theta_c,
        theta_c=theta_c,
        wang_tice=wang_tice_bound(cfg),
        lambdas=lambdas,
        bounds_m=np.asarray([r.bound_m for r in results]),
        argmax_ks=np.asarray([r.argmax_k for r in results]),
        residuals=np.asarray([r.fixed_point_residual for r in results]),
        results=results,
    )


@dataclass(frozen=True)
class ContinuityProbe:
    """Two-sided growth-rate gaps around theta0 for a shrinking delta sequence."""

    theta0: float
    lambda0: float
    deltas: np.ndarray
    gaps_below: np.ndarray  # Lambda(theta0 - delta) - Lambda(theta0), > 0
    gaps_above: np.ndarray  # Lambda(theta0) - Lambda(theta0 + delta), > 0
    moduli: np.ndarray  # recorded empirical modulus max(gap)/delta, not asserted

    @property
    def ordering_holds(self) -> bool:
        nonzero = self.deltas > 0.0
        return bool(
            np.all(self.gaps_below[nonzero] > 0.0)
            and np.all(self.gaps_above[nonzero] > 0.0)
        )


def continuity_probe(
    cfg: FluidConfig,
    theta0: float,
    delta_seq,
    disc: Discretization,
    tol_fp: float = 1e-8,
    jobs: int = 1,
    frozen: FrozenModeSet | None = None,
) -> ContinuityProbe:
    """Gap report |Lambda(theta0 +- delta) - Lambda(theta0)| with ordering check."""
    validate_config(cfg)
    theta_c = theta_critical(cfg)
    if not 0.0 < theta0 < theta_c:
        raise ValueError(f"theta0 must lie in (0, theta_c), got {theta0!r}")
    deltas = np.asarray(delta_seq, dtype=float)
    if np.any(deltas < 0.0):
        raise ValueError("deltas must be nonnegative")
    if np.any(theta0 + deltas >= theta_c) or np.any(theta0 - deltas < 0.0):
        raise ValueError("theta0 +- delta must stay inside [0, theta_c)")

    if frozen is None:
        fm, _ = _sized_mode_set(cfg, disc, tol_fp, jobs)
    else:
        fm = frozen
    lam0 = solve_lambda(cfg.with_theta(theta0), disc, tol_fp=tol_fp, frozen=fm).lam

    below = np.empty(deltas.size)
    above = np.empty(deltas.size)
    for i, d in enumerate(deltas):
        if d == 0.0:
            below[i] = 0.0
            above[i] = 0.0
            continue
        lam_lo = solve_lambda(cfg.with_theta(theta0 - d), disc, tol_fp=tol_fp, frozen=fm).lam
        lam_hi = solve_lambda(cfg.with_theta(theta0 + d), disc, tol_fp=tol_fp, frozen=fm).lam
        below[i] = lam_lo - lam0
        above[i] = lam0 - lam_hi
    with np.errstate(divide="ignore", invalid="ignore"):
        moduli = np.where(deltas > 0.0, np.maximum(below, above) / deltas, 0.0)
    return ContinuityProbe(
        theta0=theta0,
        lambda0=lam0,
        deltas=deltas,
        gaps_below=below,
        gaps_above=above,
        moduli=moduli,
    )


@dataclass(frozen=True)
class LimitReport:
    """Lambda <= m certificates approaching theta_c, with m -> 0."""

    fractions: np.ndarray
    lambdas: np.ndarray
    bounds_m: np.ndarray

    @property
    def all_bounded(self) -> bool:
        return bool(np.all(self.lambdas <= self.bounds_m * (1.0 + 1e-6)))

    @property
    def all_positive(self) -> bool:
        return bool(np.all(self.lambdas > 0.0))

    @property
    def bounds_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.bounds_m) < 0.0))


def limit_check(
    cfg: FluidConfig,
    disc: Discretization,
    fractions=(0.9, 0.99, 0.999),
    tol_fp: float = 1e-8,
    jobs: int = 1,
    frozen: FrozenModeSet | None = None,
) -> LimitReport:
    """Evaluate Lambda near theta_c; the analytic bound m certifies the limit."""
    validate_config(cfg)
    theta_c = theta_critical(cfg)
    fractions = np.asarray(fractions, dtype=float)
    if frozen is None:
        fm, _ = _sized_mode_set(cfg, disc, tol_fp, jobs)
    else:
        fm = frozen
    lambdas = []
    bounds = []
    for f in fractions:
        c = cfg.with_theta(f * theta_c)
        res = solve_lambda(c, disc, tol_fp=tol_fp, frozen=fm)
        lambdas.append(res.lam)
        bounds.append(res.bound_m)
    return LimitReport(
        fractions=fractions,
        lambdas=np.asarray(lambdas),
        bounds_m=np.asarray(bounds),
    )


@dataclass(frozen=True)
class VerifyCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class VerifyReport:
    checks: list[VerifyCheck]

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "all_pass": self.all_pass,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }


def verify_all(
    cfg: FluidConfig,
    disc: Discretization,
    tol_fp: float = 1e-8,
    jobs: int = 1,
    trace_samples: int = 300,
    seed: int = 20240831,
) -> VerifyReport:
    """Self-contained invariant suite; needs nothing beyond the config."""
    validate_config(cfg)
    checks: list[VerifyCheck] = []
    rng = np.random.default_rng(seed)

    # Trace and derivative inequalities on random admissible profiles.
    worst = 0.0
    failed = 0
    for _ in range(trace_samples):
        profile = random_admissible_profile(rng, cfg.h_minus, cfg.h_plus)
        for k in (0.5, 1.0, 2.0):
            rep = check_trace_inequalities(k, profile, cfg)
            worst = max(
                worst,
                rep.interface_ratio_lower,
                rep.interface_ratio_upper,
                rep.deriv_ratio_lower,
                rep.deriv_ratio_upper,
            )
            if not rep.all_pass:
                failed += 1
    checks.append(
        VerifyCheck(
            "trace_inequalities",
            failed == 0,
            f"{trace_samples} profiles x 3 wavenumbers, worst ratio {worst:.6f}",
        )
    )

    _, ratio = threshold_test_profile(cfg)
    expected = max(cfg.L1**2, cfg.L2**2)
    ok = abs(ratio - expected) <= 1e-12 * expected
    checks.append(
        VerifyCheck("threshold_ratio", ok, f"ratio {ratio!r} vs max(L1^2, L2^2) {expected!r}")
    )

    theta_c = theta_critical(cfg)
    stable = cfg.theta >= theta_c
    if stable:
        checks.append(
            VerifyCheck(
                "stable_regime",
                True,
                f"theta {cfg.theta!r} >= theta_c {theta_c!r}: solver checks skipped",
            )
        )
        return VerifyReport(checks)

    m = upper_bound_m(cfg)
    fm, _ = _sized_mode_set(cfg, disc, tol_fp, jobs)

    s_grid = np.geomspace(m / 20.0, 1.2 * m, 8)
    try:
        alpha_curve(cfg, s_grid, disc, frozen=fm)
        checks.append(
            VerifyCheck(
                "alpha_strictly_decreasing",
                True,
                f"8 samples on [{s_grid[0]!r}, {s_grid[-1]!r}]",
            )
        )
    except MonotonicityViolation as exc:
        checks.append(VerifyCheck("alpha_strictly_decreasing", False, str(exc)))

    s_probe = float(m / 4.0)
    a1 = global_alpha(cfg, s_probe, disc, theta=0.0, frozen=fm)
    a2 = global_alpha(cfg, s_probe, disc, theta=0.5 * theta_c, frozen=fm)
    checks.append(
        VerifyCheck(
            "alpha_decreasing_in_theta",
            a2.alpha < a1.alpha,
            f"alpha({s_probe!r}) drops from {a1.alpha!r} to {a2.alpha!r}",
        )
    )

    try:
        result = solve_lambda(cfg, disc, tol_fp=tol_fp, frozen=fm)
        checks.append(
            VerifyCheck(
                "fixed_point",
                True,
                f"lambda {result.lam!r} at k {result.argmax_k!r}, "
                f"residual {result.fixed_point_residual!r}, bound m {result.bound_m!r}",
            )
        )
    except SolverError as exc:
        checks.append(VerifyCheck("fixed_point", False, str(exc)))
        result = None

    n = disc.elements_per_layer
    oracle_tol = 5e-5 if n >= 128 else min(1e-2, 5e-5 * (128.0 / n) ** 4)
    ks = [min(1.0 / cfg.L1, 1.0 / cfg.L2)]
    if result is not None and result.argmax_k not in ks:
        ks.append(result.argmax_k)
    rows = compare_modes(cfg, ks, disc)
    diffs = [r.rel_diff for r in rows if r.rel_diff is not None]
    both_stable = all(
        r.rel_diff is not None
        or (r.lambda_variational is None and r.lambda_oracle is None)
        for r in rows
    )
    agree = both_stable and all(d <= oracle_tol for d in diffs)
    checks.append(
        VerifyCheck(
            "oracle_agreement",
            agree,
            f"max rel diff {max(diffs) if diffs else 0.0!r} over k = {ks!r} "
            f"(tolerance {oracle_tol!r} at N = {n})",
        )
    )

    for factor in (1.01, 2.0):
        try:
            solve_lambda(cfg.with_theta(factor * theta_c), disc, tol_fp=tol_fp, jobs=jobs)
            checks.append(
                VerifyCheck("threshold_stability", False, f"no StableRegime at {factor} theta_c")
            )
            break
        except StableRegime:
            continue
    else:
        checks.append(
            VerifyCheck("threshold_stability", True, "StableRegime at 1.01 and 2.0 theta_c")
        )

    return VerifyReport(checks)
