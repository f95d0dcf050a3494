import numpy as np
import pytest

from rtgrowth.model import FluidConfig


@pytest.fixture
def reference_config():
    """The standard two-layer case used throughout: moderate viscosity."""
    return FluidConfig(
        rho_plus=2.0,
        rho_minus=1.0,
        mu_plus=0.1,
        mu_minus=0.1,
        g=9.8,
        theta=0.0,
        L1=1.0,
        L2=1.0,
        h_plus=1.0,
        h_minus=1.0,
    )


@pytest.fixture
def cheap_config():
    """High-viscosity variant: small mode cutoff, fast global solves."""
    return FluidConfig(
        rho_plus=2.0,
        rho_minus=1.0,
        mu_plus=1.0,
        mu_minus=1.0,
        g=9.8,
        theta=0.0,
        L1=1.0,
        L2=1.0,
        h_plus=1.0,
        h_minus=1.0,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
