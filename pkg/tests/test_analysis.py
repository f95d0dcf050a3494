import numpy as np
import pytest

from rtgrowth.analysis import (
    continuity_probe,
    limit_check,
    sweep_theta,
    verify_all,
    _sized_mode_set,
)
from rtgrowth.model import theta_critical, wang_tice_bound
from rtgrowth.pencil import Discretization

DISC = Discretization(8)
FRACTIONS = [0.0, 0.25, 0.5, 0.75, 0.9]


@pytest.fixture(scope="module")
def cheap_mode_set():
    from rtgrowth.model import FluidConfig

    cfg = FluidConfig(
        rho_plus=2.0, rho_minus=1.0, mu_plus=1.0, mu_minus=1.0,
        g=9.8, theta=0.0, L1=1.0, L2=1.0, h_plus=1.0, h_minus=1.0,
    )
    fm, res0 = _sized_mode_set(cfg, DISC, 1e-8, jobs=1)
    return cfg, fm


def test_sweep_contract(cheap_mode_set):
    cfg, fm = cheap_mode_set
    sweep = sweep_theta(cfg, FRACTIONS, DISC, frozen=fm)
    assert np.all(np.diff(sweep.lambdas) < 0.0)
    assert np.all(sweep.lambdas > 0.0)
    assert np.all(sweep.lambdas <= sweep.bounds_m * (1.0 + 1e-6))
    assert np.all(sweep.bounds_m <= wang_tice_bound(cfg) * (1.0 + 1e-12))
    assert sweep.theta_c == pytest.approx(theta_critical(cfg))
    report = sweep.report()
    assert report["strictly_decreasing"] and report["all_positive"]
    assert report["bounded_by_m"] and report["m_below_wang_tice"]


def test_sweep_csv_shape(cheap_mode_set):
    cfg, fm = cheap_mode_set
    sweep = sweep_theta(cfg, [0.0, 0.5], DISC, frozen=fm)
    lines = sweep.csv_lines()
    assert lines[0] == "theta,theta_over_theta_c,lambda,bound_m,argmax_k,residual"
    assert len(lines) == 3
    row = lines[1].split(",")
    assert len(row) == 6
    assert float(row[0]) == 0.0 and float(row[1]) == 0.0
    assert float(row[2]) > 0.0


def test_sweep_rejects_bad_fractions(cheap_config):
    with pytest.raises(ValueError):
        sweep_theta(cheap_config, [0.0, 1.0], DISC)
    with pytest.raises(ValueError):
        sweep_theta(cheap_config, [0.5, 0.25], DISC)
    with pytest.raises(ValueError):
        sweep_theta(cheap_config, [-0.1, 0.5], DISC)
    with pytest.raises(ValueError):
        sweep_theta(cheap_config, [], DISC)


def test_continuity_probe(cheap_mode_set):
    cfg, fm = cheap_mode_set
    theta_c = theta_critical(cfg)
    probe = continuity_probe(
        cfg, 0.5 * theta_c, [1e-2 * theta_c, 1e-3 * theta_c, 0.0], DISC, frozen=fm
    )
    assert probe.ordering_holds
    assert probe.gaps_below[0] > probe.gaps_below[1] > 0.0
    assert probe.gaps_above[0] > probe.gaps_above[1] > 0.0
    assert probe.gaps_below[2] == 0.0 and probe.gaps_above[2] == 0.0
    # empirical modulus is recorded, roughly stable as delta shrinks
    assert probe.moduli[0] == pytest.approx(probe.moduli[1], rel=0.5)


def test_continuity_probe_validation(cheap_config):
    theta_c = theta_critical(cheap_config)
    with pytest.raises(ValueError):
        continuity_probe(cheap_config, 0.0, [1e-3], DISC)
    with pytest.raises(ValueError):
        continuity_probe(cheap_config, 0.5 * theta_c, [0.6 * theta_c], DISC)


def test_limit_check(cheap_mode_set):
    cfg, fm = cheap_mode_set
    report = limit_check(cfg, DISC, frozen=fm)
    assert report.all_bounded
    assert report.all_positive
    assert report.bounds_decreasing
    assert report.lambdas[-1] < 0.05 * report.lambdas[0]


def test_verify_all_passes(cheap_config):
    report = verify_all(cheap_config, Discretization(16), trace_samples=60)
    for check in report.checks:
        assert check.passed, f"{check.name}: {check.detail}"
    assert report.all_pass
    names = {c.name for c in report.checks}
    assert {"trace_inequalities", "threshold_ratio", "alpha_strictly_decreasing",
            "alpha_decreasing_in_theta", "fixed_point", "oracle_agreement",
            "threshold_stability"} <= names
    payload = report.to_json_dict()
    assert payload["all_pass"] is True


def test_verify_stable_configuration(cheap_config):
    theta_c = theta_critical(cheap_config)
    report = verify_all(cheap_config.with_theta(2.0 * theta_c), Discretization(16),
                        trace_samples=20)
    assert report.all_pass
    assert any(c.name == "stable_regime" for c in report.checks)
