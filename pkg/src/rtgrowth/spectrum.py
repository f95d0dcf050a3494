"""Global alpha(s, theta): supremum over the lattice of wavenumbers.

The admissible wavenumbers are xi = (n1/L1, n2/L2) over nonzero integer
pairs; every per-mode quantity depends on xi only through k = |xi|, so the
search collapses to the sorted list of distinct magnitudes. A FrozenModeSet
caches, per magnitude, the eigendecomposition of the (dissipation, kinetic)
pair and the transverse minimum; alpha(s, theta) for any s and theta then
costs one vectorized secular solve, which is what makes curve sampling and
fixed-point bisection cheap. The cached data does not depend on theta, so a
theta sweep reuses one set.

The zero horizontal mode is excluded: its vertical amplitude vanishes
identically under the divergence constraint, leaving pure dissipation, so it
never competes for the supremum near the fixed point.

Cutoff policy: start from the larger of the surface-tension cutoff
sqrt(g [rho] / theta) and a viscous-damping scale, then keep doubling until
the maximizer is interior (argmax < k_max / 2) and the three largest
magnitudes trail the maximum by a safety margin. Doubling that fails to
stabilize within a factor 1e6 of the smallest magnitude is an error, never a
silent truncation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import CutoffRunaway, EmptyModeSet, MonotonicityViolation
from .model import FluidConfig
from .modeforms import TransverseProfile, VerticalProfile
from .pencil import (
    Discretization,
    assemble,
    coeffs_to_profile,
    largest_eigenpair,
    mode_spectral_data,
    rank_one_largest,
    transverse_min_eigenvalue,
    transverse_min_pair,
)

CUTOFF_SAFETY = 2.0
RUNAWAY_FACTOR = 1e6
_DEDUP_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Distinct lattice magnitudes in (0, k_max], with multiplicities."""

    magnitudes: np.ndarray
    multiplicities: np.ndarray
    k_max: float

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=float)
        mult = np.asarray(self.multiplicities, dtype=int)
        mags.flags.writeable = False
        mult.flags.writeable = False
        object.__setattr__(self, "magnitudes", mags)
        object.__setattr__(self, "multiplicities", mult)

    def __len__(self) -> int:
        return self.magnitudes.size


def smallest_magnitude(cfg: FluidConfig) -> float:
    return min(1.0 / cfg.L1, 1.0 / cfg.L2)


def enumerate_modes(cfg: FluidConfig, k_max: float) -> ModeSet:
    """Exactly the distinct lattice magnitudes in (0, k_max]."""
    if k_max < smallest_magnitude(cfg):
        raise EmptyModeSet(
            f"k_max = {k_max!r} below smallest lattice magnitude "
            f"{smallest_magnitude(cfg)!r}"
        )
    n1 = int(math.ceil(k_max * cfg.L1))
    n2 = int(math.ceil(k_max * cfg.L2))
    i = np.arange(-n1, n1 + 1)
    j = np.arange(-n2, n2 + 1)
    kk = np.hypot.outer(i / cfg.L1, j / cfg.L2).ravel()
    kk = kk[(kk > 0.0) & (kk <= k_max)]
    kk.sort()
    # magnitude dedup with relative tolerance
    mags = [kk[0]]
    mult = [1]
    for k in kk[1:]:
        if k - mags[-1] <= _DEDUP_RTOL * k:
            mult[-1] += 1
        else:
            mags.append(k)
            mult.append(1)
    return ModeSet(np.asarray(mags), np.asarray(mult), k_max)


def initial_cutoff(cfg: FluidConfig, theta: float | None = None) -> float:
    """Starting k_max: surface-tension cutoff, viscous scale, lattice floor."""
    theta = cfg.theta if theta is None else theta
    g_rho = cfg.g * cfg.density_jump
    candidates = [
        CUTOFF_SAFETY
        * math.sqrt(g_rho * max(cfg.rho_plus, cfg.rho_minus) * max(cfg.h_plus, cfg.h_minus))
        / min(cfg.mu_plus, cfg.mu_minus),
        smallest_magnitude(cfg),
    ]
    if theta > 0.0:
        candidates.append(math.sqrt(g_rho / theta))
    return max(candidates)


@dataclass(frozen=True)
class ProfileDiagnostics:
    """Quadratic-form values of the returned maximizer (kinetic normalized)."""

    kinetic: float
    dissipation: float
    surface: float
    eigen_residual: float


@dataclass(frozen=True, eq=False)
class ModeTable:
    """Per-mode branch values underlying one alpha evaluation."""

    k: np.ndarray
    multiplicity: np.ndarray
    alpha_longitudinal: np.ndarray
    alpha_transverse: np.ndarray

    @property
    def alpha(self) -> np.ndarray:
        return np.maximum(self.alpha_longitudinal, self.alpha_transverse)

    @property
    def branch(self) -> list[str]:
        return [
            "longitudinal" if al >= at else "transverse"
            for al, at in zip(self.alpha_longitudinal, self.alpha_transverse)
        ]

    def csv_lines(self) -> list[str]:
        lines = ["k,alpha_longitudinal,alpha_transverse,branch"]
        for k, al, at, br in zip(
            self.k, self.alpha_longitudinal, self.alpha_transverse, self.branch
        ):
            lines.append(f"{float(k)!r},{float(al)!r},{float(at)!r},{br}")
        return lines


@dataclass(frozen=True, eq=False)
class AlphaValue:
    """Global supremum alpha(s, theta) with its maximizer and mode table."""

    alpha: float
    argmax_k: float
    branch: str
    s: float
    theta: float
    eigenprofile: VerticalProfile | TransverseProfile | None
    diagnostics: ProfileDiagnostics | None
    table: ModeTable

    def __post_init__(self):
        if self.alpha > 0.0 and self.branch != "longitudinal":
            raise AssertionError("positive alpha must come from the coupled branch")


class FrozenModeSet:
    """Per-mode spectral cache over one lattice mode set.

    All expensive objects here (eigendecompositions of the per-mode pairs and
    the transverse minima) are independent of both s and theta; evaluations
    for any (s, theta) reduce to the rank-one secular equation over the
    cached rows. `locked` marks sets deliberately frozen across a multi-point
    computation: escalation is then forbidden and a non-interior maximizer
    raises instead of extending.
    """

    def __init__(self, cfg: FluidConfig, disc: Discretization, modes: ModeSet, jobs: int = 1):
        self.cfg = cfg
        self.disc = disc
        self.modes = modes
        self.locked = False
        self._jobs = max(1, int(jobs))
        lam, z2, lam_tau = self._compute_rows(modes.magnitudes)
        self._lam = lam
        self._z2 = z2
        self._lam_tau = lam_tau

    def _compute_rows(self, ks: np.ndarray):
        def one(k: float):
            forms = assemble(k, self.cfg, self.disc)
            lam, z2 = mode_spectral_data(forms)
            return lam, z2, transverse_min_eigenvalue(k, self.cfg, self.disc)

        if self._jobs > 1 and ks.size > 1:
            with ThreadPoolExecutor(self._jobs) as ex:
                rows = list(ex.map(one, ks))
        else:
            rows = [one(k) for k in ks]
        if not rows:
            dim = self.disc.n_dofs
            return np.zeros((0, dim)), np.zeros((0, dim)), np.zeros(0)
        lam = np.stack([r[0] for r in rows])
        z2 = np.stack([r[1] for r in rows])
        lam_tau = np.asarray([r[2] for r in rows])
        return lam, z2, lam_tau

    @property
    def _z2_sum(self) -> np.ndarray:
        cached = getattr(self, "_z2_sum_cache", None)
        if cached is None or cached.size != self._z2.shape[0]:
            cached = self._z2.sum(axis=1)
            self._z2_sum_cache = cached
        return cached

    @classmethod
    def freeze(
        cls, cfg: FluidConfig, disc: Discretization, k_max: float, jobs: int = 1
    ) -> "FrozenModeSet":
        return cls(cfg, disc, enumerate_modes(cfg, k_max), jobs=jobs)

    def extend_to(self, k_max: float) -> None:
        if self.locked:
            raise MonotonicityViolation(
                "mode set is frozen for a multi-point computation; escalation "
                "would change earlier samples"
            )
        if k_max <= self.modes.k_max:
            return
        wider = enumerate_modes(self.cfg, k_max)
        fresh = wider.magnitudes > self.modes.k_max * (1.0 + _DEDUP_RTOL)
        lam, z2, lam_tau = self._compute_rows(wider.magnitudes[fresh])
        self._lam = np.vstack([self._lam, lam])
        self._z2 = np.vstack([self._z2, z2])
        self._lam_tau = np.concatenate([self._lam_tau, lam_tau])
        self.modes = wider

    def alpha_arrays(self, s: float, theta: float) -> tuple[np.ndarray, np.ndarray]:
        """(alpha_longitudinal, alpha_transverse) over the mode set."""
        if s <= 0.0:
            raise ValueError(f"modification parameter must be > 0, got {s!r}")
        ks = self.modes.magnitudes
        c = self.cfg.g * self.cfg.density_jump - theta * ks**2
        alpha_long = rank_one_largest(self._lam, self._z2, c, s)
        alpha_tau = -s * self._lam_tau
        return alpha_long, alpha_tau

    def max_with_argmax(self, s: float, theta: float) -> tuple[float, int]:
        """Exact (max alpha, argmax index) without solving every mode.

        Per-mode upper bound: alpha <= -s lam_0 + max(c, 0) sum(z^2). Modes
        are visited in decreasing bound order; exact secular solves stop once
        the next bound cannot beat the best exact value. The transverse
        branch is already exact (alpha_tau = -s lam_tau). Ties resolve to the
        smallest magnitude for determinism.
        """
        if s <= 0.0:
            raise ValueError(f"modification parameter must be > 0, got {s!r}")
        ks = self.modes.magnitudes
        c = self.cfg.g * self.cfg.density_jump - theta * ks**2
        bound = -s * self._lam[:, 0] + np.where(c > 0.0, c * self._z2_sum, 0.0)
        order = np.argsort(-bound, kind="stable")

        per_mode = -s * self._lam_tau  # transverse branch is exact already
        best = float(per_mode.max())
        chunk = 64
        for start in range(0, order.size, chunk):
            sel = order[start : start + chunk]
            if bound[sel[0]] <= best:
                break
            sel = sel[bound[sel] > best]
            if sel.size == 0:
                continue
            vals = rank_one_largest(self._lam[sel], self._z2[sel], c[sel], s)
            per_mode[sel] = np.maximum(per_mode[sel], vals)
            best = max(best, float(vals.max()))
        idx = int(np.argmax(per_mode))
        return float(per_mode[idx]), idx

    def alpha_max(self, s: float, theta: float) -> float:
        return self.max_with_argmax(s, theta)[0]

    def alpha_value(self, s: float, theta: float, want_profile: bool = True) -> AlphaValue:
        al, at = self.alpha_arrays(s, theta)
        per_mode = np.maximum(al, at)
        idx = int(np.argmax(per_mode))
        k_star = float(self.modes.magnitudes[idx])
        branch = "longitudinal" if al[idx] >= at[idx] else "transverse"
        alpha = float(per_mode[idx])

        profile = None
        diag = None
        if want_profile:
            if branch == "longitudinal":
                forms = assemble(k_star, self.cfg.with_theta(theta), self.disc)
                sol = largest_eigenpair(forms, s)
                if abs(sol.alpha - alpha) > 1e-8 * max(1.0, abs(alpha)):
                    raise AssertionError(
                        f"secular/direct mismatch at k={k_star}: {alpha} vs {sol.alpha}"
                    )
                profile = coeffs_to_profile(sol.vector, forms)
                diag = ProfileDiagnostics(
                    kinetic=1.0,
                    dissipation=float(sol.vector @ forms.A_diss @ sol.vector),
                    surface=float(sol.vector[forms.e0_index] ** 2),
                    eigen_residual=sol.residual,
                )
            else:
                lam_min, values = transverse_min_pair(k_star, self.cfg, self.disc)
                grid = assemble(k_star, self.cfg, self.disc).grid
                profile = TransverseProfile(grid, values)
                diag = ProfileDiagnostics(
                    kinetic=1.0,
                    dissipation=lam_min,
                    surface=0.0,
                    eigen_residual=0.0,
                )
        table = ModeTable(
            k=self.modes.magnitudes,
            multiplicity=self.modes.multiplicities,
            alpha_longitudinal=al,
            alpha_transverse=at,
        )
        return AlphaValue(
            alpha=alpha,
            argmax_k=k_star,
            branch=branch,
            s=s,
            theta=theta,
            eigenprofile=profile,
            diagnostics=diag,
            table=table,
        )

    def certificate(self, s: float, theta: float) -> bool:
        """Interiority + tail-domination check for the current cutoff."""
        al, at = self.alpha_arrays(s, theta)
        per_mode = np.maximum(al, at)
        if per_mode.size < 4:
            return False
        idx = int(np.argmax(per_mode))
        if not self.modes.magnitudes[idx] < 0.5 * self.modes.k_max:
            return False
        a_max = per_mode[idx]
        margin = max(1.0, abs(a_max))
        return bool(np.all(per_mode[-3:] <= a_max - margin))

    def require_interior(self, s: float, theta: float) -> None:
        _, idx = self.max_with_argmax(s, theta)
        if not self.modes.magnitudes[idx] < 0.5 * self.modes.k_max:
            raise CutoffRunaway(
                f"maximizer k = {self.modes.magnitudes[idx]!r} is not interior to "
                f"the frozen cutoff {self.modes.k_max!r}"
            )


def escalate_mode_set(
    fm: FrozenModeSet, s: float, theta: float
) -> None:
    """Double the cutoff until the certificate holds."""
    floor = smallest_magnitude(fm.cfg)
    while not fm.certificate(s, theta):
        new_k_max = 2.0 * fm.modes.k_max
        if new_k_max > RUNAWAY_FACTOR * floor:
            raise CutoffRunaway(
                f"cutoff escalation exceeded {RUNAWAY_FACTOR:g} x smallest "
                f"magnitude without an interior maximizer (k_max = {fm.modes.k_max!r})"
            )
        fm.extend_to(new_k_max)


def global_alpha(
    cfg: FluidConfig,
    s: float,
    disc: Discretization,
    theta: float | None = None,
    k_max: float | None = None,
    frozen: FrozenModeSet | None = None,
    jobs: int = 1,
    want_profile: bool = True,
) -> AlphaValue:
    """alpha(s, theta) = sup over modes of the larger branch value.

    With `frozen` the evaluation uses exactly that mode set (raising if the
    maximizer is not interior to its cutoff when the set is locked). With an
    explicit `k_max` the cutoff is fixed, no escalation. Otherwise the cutoff
    starts at initial_cutoff and escalates until certified.
    """
    theta = cfg.theta if theta is None else theta
    if frozen is not None:
        if frozen.locked:
            frozen.require_interior(s, theta)
        return frozen.alpha_value(s, theta, want_profile=want_profile)
    if k_max is not None:
        fm = FrozenModeSet.freeze(cfg, disc, k_max, jobs=jobs)
        return fm.alpha_value(s, theta, want_profile=want_profile)
    fm = FrozenModeSet.freeze(cfg, disc, initial_cutoff(cfg, theta), jobs=jobs)
    escalate_mode_set(fm, s, theta)
    return fm.alpha_value(s, theta, want_profile=want_profile)


@dataclass(frozen=True, eq=False)
class AlphaCurve:
    """Samples of alpha over a strictly increasing s grid."""

    s: np.ndarray
    values: list[AlphaValue] = field(repr=False)
    zero_bracket: tuple[float, float] | None

    @property
    def alphas(self) -> np.ndarray:
        return np.asarray([v.alpha for v in self.values])

    def csv_lines(self) -> list[str]:
        lines = ["s,alpha,argmax_k,branch"]
        for s, v in zip(self.s, self.values):
            lines.append(f"{float(s)!r},{float(v.alpha)!r},{float(v.argmax_k)!r},{v.branch}")
        return lines


def alpha_curve(
    cfg: FluidConfig,
    s_grid,
    disc: Discretization,
    theta: float | None = None,
    frozen: FrozenModeSet | None = None,
    jobs: int = 1,
) -> AlphaCurve:
    """Sample alpha on s_grid over one frozen mode set; verify strict decrease."""
    theta = cfg.theta if theta is None else theta
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size < 2:
        raise ValueError("s_grid must be a 1-d grid with at least two points")
    if not (np.all(s_grid > 0.0) and np.all(np.diff(s_grid) > 0.0)):
        raise ValueError("s_grid must be strictly increasing and positive")

    fm = frozen
    if fm is None:
        fm = FrozenModeSet.freeze(cfg, disc, initial_cutoff(cfg, theta), jobs=jobs)
        # size the set at the most demanding sample, then re-certify the rest
        for _ in range(64):
            escalate_mode_set(fm, float(s_grid[0]), theta)
            if all(fm.certificate(float(s), theta) for s in s_grid):
                break
            fm.extend_to(2.0 * fm.modes.k_max)
        else:
            raise CutoffRunaway("alpha_curve failed to certify a common cutoff")
    values = [fm.alpha_value(float(s), theta) for s in s_grid]

    alphas = np.asarray([v.alpha for v in values])
    if not np.all(np.diff(alphas) < 0.0):
        raise MonotonicityViolation(
            "sampled alpha(s) is not strictly decreasing; the mode set changed "
            "between samples or the discretization is inconsistent"
        )
    zero_bracket = None
    sign_change = np.nonzero((alphas[:-1] > 0.0) & (alphas[1:] <= 0.0))[0]
    if sign_change.size:
        i = int(sign_change[0])
        zero_bracket = (float(s_grid[i]), float(s_grid[i + 1]))
    return AlphaCurve(s=s_grid, values=values, zero_bracket=zero_bracket)
