"""Fixed-point solve Lambda = sqrt(alpha(Lambda)) by monotone bracketing.

f(s) = alpha(s) - s^2 is strictly decreasing (alpha strictly decreases in s
while s^2 increases), so the growth rate is the unique zero of f. Each alpha
evaluation is expensive but safe, f is only locally Lipschitz, and a bracket
invariant is easy to maintain, so bisection is used rather than Newton or
secant steps. The upper bracket is seeded just above the closed-form bound m
(the true growth rate can never exceed it; doubling remains as a fallback for
discrete-alpha mismatch), the lower bracket walks down by halving until
f > 0. One mode set is frozen across the entire solve so that the discrete
f inherits exact strict monotonicity, which is asserted at every step.

Bisection refines past the requested bracket width until the fixed-point
residual |Lambda^2 - alpha(Lambda)| <= tol_fp * max(1, Lambda^2) actually
holds; the width rule alone cannot guarantee that when |f'| > 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BracketFailureHigh,
    BracketFailureLow,
    MonotonicityViolation,
    NoConvergence,
    SolverError,
    StableRegime,
)
from .model import FluidConfig, theta_critical, upper_bound_m, validate_config
from .modeforms import VerticalProfile
from .pencil import (
    Discretization,
    PencilForms,
    assemble,
    coeffs_to_profile,
    largest_eigenpair,
    mode_spectral_data,
    profile_to_coeffs,
    prolong_coeffs,
    rank_one_largest,
    residual_dual_norm,
)
from .spectrum import (
    AlphaValue,
    FrozenModeSet,
    escalate_mode_set,
    initial_cutoff,
)

MAX_BRACKET_STEPS = 60
MAX_BISECTIONS = 300


@dataclass(frozen=True, eq=False)
class GrowthResult:
    """Growth rate with maximizing mode, eigenprofile, and diagnostics."""

    lam: float
    argmax_k: float
    eigenprofile: VerticalProfile
    fixed_point_residual: float
    bracket_history: list[tuple[float, float]]
    alpha_at_lambda: AlphaValue
    bound_m: float
    theta: float
    resolution: int
    tol_fp: float

    @property
    def branch(self) -> str:
        return self.alpha_at_lambda.branch

    def validate(self) -> None:
        if not 0.0 < self.lam <= self.bound_m * (1.0 + 1e-6):
            raise SolverError(
                f"growth rate {self.lam!r} escapes (0, m] with m = {self.bound_m!r}"
            )
        if self.fixed_point_residual > self.tol_fp * max(1.0, self.lam**2):
            raise SolverError(
                f"fixed-point residual {self.fixed_point_residual!r} exceeds tolerance"
            )
        if not self.alpha_at_lambda.alpha > 0.0:
            raise SolverError("alpha at the fixed point must be positive")
        if self.branch != "longitudinal":
            raise SolverError("unstable maximizer must couple to the interface")
        profile = self.eigenprofile
        if profile.interface_value == 0.0:
            raise SolverError("eigenprofile has vanishing interface value")
        if not np.max(np.abs(profile.psi_derivs)) > 0.0:
            raise SolverError("eigenprofile has identically zero derivative")

    def to_json_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "argmax_k": self.argmax_k,
            "fixed_point_residual": self.fixed_point_residual,
            "bound_m": self.bound_m,
            "theta": self.theta,
            "resolution": self.resolution,
            "bracket_steps": len(self.bracket_history),
            "branch": self.branch,
        }


def bisect_fixed_point(f, s_lo, s_hi, f_lo, f_hi, tol_fp):
    """Bisection core over a strictly decreasing f with sign-bracketed ends.

    Returns (lam, history, f_mid_last). Unit-testable against injected alpha
    mocks; asserts the strict decrease f(lo) > f(mid) > f(hi) at every step.
    """
    if not (f_lo > 0.0 > f_hi):
        raise ValueError("bisect_fixed_point requires f(s_lo) > 0 > f(s_hi)")
    history = [(s_lo, s_hi)]
    f_mid = f_lo
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (s_lo + s_hi)
        f_mid = f(mid)
        if not (f_lo > f_mid > f_hi):
            raise MonotonicityViolation(
                f"f not strictly decreasing across ({s_lo!r}, {mid!r}, {s_hi!r}): "
                f"({f_lo!r}, {f_mid!r}, {f_hi!r})"
            )
        if f_mid > 0.0:
            s_lo, f_lo = mid, f_mid
        else:
            s_hi, f_hi = mid, f_mid
        history.append((s_lo, s_hi))
        if s_hi - s_lo <= tol_fp:
            lam = 0.5 * (s_lo + s_hi)
            if abs(f(lam)) <= tol_fp * max(1.0, lam * lam):
                return lam, history, f_mid
    raise NoConvergence("fixed-point bisection stalled", MAX_BISECTIONS)


def solve_lambda(
    cfg: FluidConfig,
    disc: Discretization,
    tol_fp: float = 1e-8,
    frozen: FrozenModeSet | None = None,
    jobs: int = 1,
) -> GrowthResult:
    """Largest growth rate Lambda with Lambda^2 = alpha(Lambda)."""
    validate_config(cfg)
    if tol_fp <= 0.0:
        raise ValueError(f"tol_fp must be > 0, got {tol_fp!r}")
    theta_c = theta_critical(cfg)
    if cfg.theta >= theta_c:
        raise StableRegime(cfg.theta, theta_c)
    m = upper_bound_m(cfg)
    theta = cfg.theta

    if frozen is not None:
        fm = frozen
        owns_set = False
    else:
        fm = FrozenModeSet.freeze(cfg, disc, initial_cutoff(cfg), jobs=jobs)
        owns_set = True

    # Bracket and bisect on one frozen set; certify the cutoff at the answer.
    # Positive-sign decisions are conservative under truncation (adding modes
    # only raises alpha), and the certificate at Lambda guards the negative
    # side; a failed certificate doubles the cutoff and redoes the solve.
    lam = history = None
    for _ in range(12):

        def f(s: float) -> float:
            return fm.alpha_max(s, theta) - s * s

        s_lo = min(1.0, m) / 16.0
        f_lo = f(s_lo)
        steps = 0
        while f_lo <= 0.0 and steps < MAX_BRACKET_STEPS:
            s_lo *= 0.5
            f_lo = f(s_lo)
            steps += 1
        if f_lo <= 0.0:
            raise BracketFailureLow(
                f"alpha(s) - s^2 <= 0 down to s = {s_lo!r}; alpha should be positive "
                "near 0 for theta < theta_c, so the discretization is inconsistent"
            )

        s_hi = 1.01 * m
        f_hi = f(s_hi)
        steps = 0
        while f_hi >= 0.0 and steps < MAX_BRACKET_STEPS:
            s_hi *= 2.0
            f_hi = f(s_hi)
            steps += 1
        if f_hi >= 0.0:
            raise BracketFailureHigh(
                f"alpha(s) - s^2 >= 0 up to s = {s_hi!r}, far beyond the bound m = {m!r}"
            )

        lam, history, _ = bisect_fixed_point(f, s_lo, s_hi, f_lo, f_hi, tol_fp)
        if not owns_set:
            # shared (possibly locked) set: guard the answer, never extend
            fm.require_interior(lam, theta)
            break
        if fm.certificate(lam, theta):
            break
        escalate_mode_set(fm, lam, theta)
    else:
        raise NoConvergence("mode cutoff never certified at the fixed point", 12)

    alpha_val = fm.alpha_value(lam, theta, want_profile=True)
    result = GrowthResult(
        lam=lam,
        argmax_k=alpha_val.argmax_k,
        eigenprofile=alpha_val.eigenprofile,
        fixed_point_residual=abs(lam * lam - alpha_val.alpha),
        bracket_history=history,
        alpha_at_lambda=alpha_val,
        bound_m=m,
        theta=theta,
        resolution=disc.elements_per_layer,
        tol_fp=tol_fp,
    )
    result.validate()
    return result


@dataclass(frozen=True, eq=False)
class ModeGrowth:
    """Per-mode growth rate: the fixed point of the single-mode alpha_k."""

    k: float
    lam: float
    fixed_point_residual: float
    vector: np.ndarray
    forms: PencilForms

    @property
    def profile(self) -> VerticalProfile:
        return coeffs_to_profile(self.vector, self.forms)


def solve_mode_lambda(
    cfg: FluidConfig,
    k: float,
    disc: Discretization,
    tol_fp: float = 1e-12,
) -> ModeGrowth | None:
    """Fixed point of the single-mode branch; None when the mode is stable."""
    validate_config(cfg)
    theta_c = theta_critical(cfg)
    if cfg.theta >= theta_c:
        raise StableRegime(cfg.theta, theta_c)
    m = upper_bound_m(cfg)
    forms = assemble(k, cfg, disc)
    if forms.c_k <= 0.0:
        return None
    lam_rows, z2 = mode_spectral_data(forms)
    c = np.asarray([forms.c_k])

    def f(s: float) -> float:
        return float(rank_one_largest(lam_rows, z2, c, s)[0]) - s * s

    s_lo = min(1.0, m) / 16.0
    f_lo = f(s_lo)
    steps = 0
    while f_lo <= 0.0 and steps < MAX_BRACKET_STEPS:
        s_lo *= 0.5
        f_lo = f(s_lo)
        steps += 1
    if f_lo <= 0.0:
        return None
    s_hi = 1.01 * m
    f_hi = f(s_hi)
    steps = 0
    while f_hi >= 0.0 and steps < MAX_BRACKET_STEPS:
        s_hi *= 2.0
        f_hi = f(s_hi)
        steps += 1
    if f_hi >= 0.0:
        raise BracketFailureHigh(f"per-mode f positive beyond s = {s_hi!r} at k = {k!r}")

    lam, _, _ = bisect_fixed_point(f, s_lo, s_hi, f_lo, f_hi, tol_fp)
    sol = largest_eigenpair(forms, lam)
    return ModeGrowth(
        k=k,
        lam=lam,
        fixed_point_residual=abs(lam * lam - (f(lam) + lam * lam)),
        vector=sol.vector,
        forms=forms,
    )


def richardson_lambda(lam_coarse: float, lam_fine: float, order: int = 4) -> float:
    """Richardson extrapolation over N and 2N. Derived value, not a solve."""
    weight = 2.0**order
    return (weight * lam_fine - lam_coarse) / (weight - 1.0)


def bvp_residual(result: GrowthResult, cfg: FluidConfig) -> float:
    """Strong-form consistency of the solved eigenpair, tested at mesh 2N.

    The coarse eigenvector is embedded exactly into the once-refined mesh and
    the pencil residual (c e0 e0^T - Lambda A - Lambda^2 B) x is measured
    there in the energy-dual norm; coarse test components vanish by Galerkin
    orthogonality, so this isolates the part of the boundary-value problem
    the resolution N cannot represent. Normalized by Lambda^2 and the kinetic
    norm of the embedded vector.
    """
    cfg = validate_config(cfg).with_theta(result.theta)
    disc = Discretization(result.resolution)
    forms = assemble(result.argmax_k, cfg, disc)
    x = profile_to_coeffs(result.eigenprofile, forms)
    x_fine = prolong_coeffs(x, forms)
    forms_fine = assemble(result.argmax_k, cfg, disc.refined())
    dual = residual_dual_norm(forms_fine, x_fine, result.lam, result.lam**2)
    kinetic = math.sqrt(float(x_fine @ forms_fine.B @ x_fine))
    return dual / (result.lam**2 * kinetic)
