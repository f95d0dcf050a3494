"""Physical configuration, validation, and closed-form threshold quantities.

All parameters are dimensional scalars in whatever consistent unit system the
caller chooses; nothing here rescales. The horizontal domain is periodic with
periods 2*pi*L1 and 2*pi*L2, the interface sits at y3 = 0, the rigid walls at
y3 = h_plus and y3 = -h_minus.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields

from .errors import (
    DensityOrderViolation,
    NegativeSurfaceTension,
    NonPositiveParameter,
    StableRegime,
    ZeroWaveNumber,
)

_POSITIVE_FIELDS = (
    "rho_plus",
    "rho_minus",
    "mu_plus",
    "mu_minus",
    "g",
    "L1",
    "L2",
    "h_plus",
    "h_minus",
)


@dataclass(frozen=True)
class FluidConfig:
    """Two-layer configuration: heavier fluid (+) on top of lighter fluid (-)."""

    rho_plus: float
    rho_minus: float
    mu_plus: float
    mu_minus: float
    g: float
    theta: float
    L1: float
    L2: float
    h_plus: float
    h_minus: float

    @property
    def density_jump(self) -> float:
        """Interface density jump rho_plus - rho_minus (positive when unstable)."""
        return self.rho_plus - self.rho_minus

    @property
    def max_period_scale_sq(self) -> float:
        return max(self.L1 * self.L1, self.L2 * self.L2)

    def with_theta(self, theta: float) -> "FluidConfig":
        d = asdict(self)
        d["theta"] = theta
        return FluidConfig(**d)

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "FluidConfig":
        data = json.loads(text)
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        missing = names - set(data)
        if missing:
            raise ValueError(f"missing config fields: {sorted(missing)}")
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class ModeIndex:
    """One lattice wavenumber xi = (n1/L1, n2/L2), the unit of decomposition."""

    n1: int
    n2: int
    L1: float
    L2: float

    def __post_init__(self):
        if self.n1 == 0 and self.n2 == 0:
            raise ZeroWaveNumber("lattice mode (0, 0) carries no interface motion")

    @property
    def xi(self) -> tuple[float, float]:
        return (self.n1 / self.L1, self.n2 / self.L2)

    @property
    def k(self) -> float:
        return math.hypot(self.n1 / self.L1, self.n2 / self.L2)


@dataclass(frozen=True)
class Thresholds:
    """Closed-form stability threshold and growth-rate bounds."""

    theta_c: float
    m: float
    wang_tice: float


def validate_config(cfg: FluidConfig) -> FluidConfig:
    """Return cfg unchanged if all invariants hold, else raise.

    Comparisons are exact predicates: these are user-supplied inputs, not
    computed quantities. Equal densities are rejected outright because every
    downstream formula divides by the density jump.
    """
    for name in _POSITIVE_FIELDS:
        value = getattr(cfg, name)
        if not value > 0:
            raise NonPositiveParameter(name)
    if cfg.theta < 0:
        raise NegativeSurfaceTension(f"theta = {cfg.theta!r} < 0")
    if not cfg.rho_plus > cfg.rho_minus:
        raise DensityOrderViolation(
            f"rho_plus = {cfg.rho_plus!r} must exceed rho_minus = {cfg.rho_minus!r}"
        )
    return cfg


def theta_critical(cfg: FluidConfig) -> float:
    """Critical surface tension g * (rho_plus - rho_minus) * max(L1^2, L2^2)."""
    return cfg.g * cfg.density_jump * cfg.max_period_scale_sq


def wang_tice_bound(cfg: FluidConfig) -> float:
    """Older upper bound h_minus * g * (rho_plus - rho_minus) / (4 mu_minus)."""
    return cfg.h_minus * cfg.g * cfg.density_jump / (4.0 * cfg.mu_minus)


def upper_bound_m(cfg: FluidConfig) -> float:
    """Upper bound m on the growth rate, valid for theta < theta_c.

    m = min( (theta_c - theta) / (4 max{L1^2, L2^2}) * min{h+/mu+, h-/mu-},
             (4 (g [rho] (theta_c - theta))^2
              / (theta_c^2 max{rho+ mu+, rho- mu-}))^(1/3) ).
    Both branches vanish as theta -> theta_c.
    """
    theta_c = theta_critical(cfg)
    if cfg.theta >= theta_c:
        raise StableRegime(cfg.theta, theta_c)
    gap = theta_c - cfg.theta
    visc = min(cfg.h_plus / cfg.mu_plus, cfg.h_minus / cfg.mu_minus)
    branch1 = gap / (4.0 * cfg.max_period_scale_sq) * visc
    rho_mu = max(cfg.rho_plus * cfg.mu_plus, cfg.rho_minus * cfg.mu_minus)
    branch2 = (4.0 * (cfg.g * cfg.density_jump * gap) ** 2 / (theta_c**2 * rho_mu)) ** (
        1.0 / 3.0
    )
    return min(branch1, branch2)


def thresholds(cfg: FluidConfig) -> Thresholds:
    return Thresholds(
        theta_c=theta_critical(cfg),
        m=upper_bound_m(cfg),
        wang_tice=wang_tice_bound(cfg),
    )
