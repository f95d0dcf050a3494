import dataclasses
import math

import numpy as np
import pytest
from scipy.linalg import null_space

from rtgrowth.errors import DegenerateExponents
from rtgrowth.fixedpoint import solve_mode_lambda
from rtgrowth.model import theta_critical, upper_bound_m
from rtgrowth.modeforms import random_admissible_profile, uniform_layered_grid, VerticalProfile
from rtgrowth.oracle import (
    build_system,
    compare_modes,
    comparison_csv_lines,
    determinant,
    determinant_slogdet,
    dispersion_root,
    evaluate_jump_rows,
    scan_sign_changes,
    validate_jump_rows,
)
from rtgrowth.pencil import Discretization


def test_system_structure(reference_config):
    sys8 = build_system(1.0, 1.0, reference_config)
    assert sys8.matrix.shape == (8, 8)
    assert sys8.q_plus > 1.0 and sys8.q_minus > 1.0
    # wall rows act on a single layer's columns
    assert np.array_equal(np.nonzero(sys8.matrix[0])[0], [0])
    assert np.all(sys8.matrix[1, 4:] == 0.0)
    assert np.all(sys8.matrix[2, :4] == 0.0)


def test_regularized_basis_small_n(reference_config):
    # q -> k as n -> 0: the combination basis must stay finite and smooth
    vals = [determinant(1.0, n, reference_config) for n in (1e-10, 1e-9, 1e-8)]
    assert all(np.isfinite(v) for v in vals)
    assert np.sign(vals[0]) == np.sign(vals[1]) == np.sign(vals[2])


def test_determinant_overflow_guard(reference_config):
    with pytest.raises(DegenerateExponents):
        determinant(800.0, 1.0, reference_config)


def test_root_matches_variational(reference_config):
    disc = Discretization(64)
    scan_max = 1.05 * upper_bound_m(reference_config)
    for k in (1.0, 2.0):
        growth = solve_mode_lambda(reference_config, k, disc)
        root = dispersion_root(k, reference_config, scan_max)
        assert root == pytest.approx(growth.lam, rel=1e-6)


def test_root_none_for_stable_mode(reference_config):
    theta = 0.5 * theta_critical(reference_config)
    cfg = reference_config.with_theta(theta)
    # k = 2: c_k = 9.8 - 4.9 * 4 < 0
    assert dispersion_root(2.0, cfg, 1.05 * upper_bound_m(cfg)) is None
    assert solve_mode_lambda(cfg, 2.0, Discretization(16)) is None


def test_root_decreases_with_theta(reference_config):
    k = 1.0
    theta_cut = 9.8 / k**2  # c_k = 0 exactly at this theta
    cfg_cut = reference_config.with_theta(theta_cut * 0.999)
    root0 = dispersion_root(k, reference_config, 1.05 * upper_bound_m(reference_config))
    root_cut = dispersion_root(k, cfg_cut, 1.05 * upper_bound_m(cfg_cut))
    if root_cut is not None:
        assert root_cut < root0


def test_dimensional_homogeneity(reference_config):
    # (rho, mu, theta) scaled together, g fixed: the reduced problem has the
    # same q's and the jump rows all pick up one common factor
    c = 3.7
    scaled = dataclasses.replace(
        reference_config.with_theta(2.0 * c),
        rho_plus=reference_config.rho_plus * c,
        rho_minus=reference_config.rho_minus * c,
        mu_plus=reference_config.mu_plus * c,
        mu_minus=reference_config.mu_minus * c,
    )
    base = reference_config.with_theta(2.0)
    r1 = dispersion_root(1.0, base, 1.05 * upper_bound_m(base))
    r2 = dispersion_root(1.0, scaled, 1.05 * upper_bound_m(scaled))
    assert r2 == pytest.approx(r1, rel=1e-9)


def test_determinant_cofactor_identity(reference_config, rng):
    # the cofactor vector of rows 1..7 spans their nullspace, so for any
    # candidate last row u: det([rows; u]) / (u . v) is one fixed constant
    system = build_system(1.3, 0.8, reference_config)
    M = system.matrix
    v = null_space(M[:7], rcond=1e-12)
    assert v.shape[1] == 1
    v = v[:, 0]
    ratio = np.linalg.det(M) / (M[7] @ v)
    for _ in range(5):
        u = rng.standard_normal(8)
        M2 = M.copy()
        M2[7] = u
        assert np.linalg.det(M2) / (u @ v) == pytest.approx(ratio, rel=1e-8)


def test_scan_parity_stable_under_density(reference_config):
    scan_max = 1.05 * upper_bound_m(reference_config)
    n1 = scan_sign_changes(1.0, reference_config, scan_max, 240)
    n2 = scan_sign_changes(1.0, reference_config, scan_max, 480)
    assert n1 == n2 >= 1


def test_slogdet_normalization_invariance(reference_config):
    for n in (0.3, 1.0, 2.4):
        s1, l1 = determinant_slogdet(1.0, n, reference_config, "colmax")
        s2, l2 = determinant_slogdet(1.0, n, reference_config, "plain")
        assert s1 == s2
        assert l1 == pytest.approx(l2, rel=1e-12)


def test_scan_max_precondition(reference_config):
    with pytest.raises(ValueError):
        dispersion_root(1.0, reference_config, 0.5 * upper_bound_m(reference_config))
    with pytest.raises(ValueError):
        dispersion_root(1.0, reference_config, 2.0 * upper_bound_m(reference_config), n_points=50)


def test_jump_rows_converge(reference_config):
    rep128 = validate_jump_rows(reference_config, 1.0, Discretization(128))
    rep256 = validate_jump_rows(reference_config, 1.0, Discretization(256))
    assert rep128.tangential_residual < 1e-3
    assert rep128.normal_residual < 1e-3
    # both at least halve; the tangential row is higher order still
    assert rep256.tangential_residual <= 0.5 * rep128.tangential_residual
    assert rep256.normal_residual <= 0.5 * rep128.normal_residual
    assert rep256.tangential_residual <= rep128.tangential_residual / 3.5


def test_jump_rows_symmetric_profile(cheap_config):
    # mirror-symmetric data with equal viscosities: the tangential jump
    # cancels identically
    grid = uniform_layered_grid(1.0, 1.0, 16)
    vals = np.cos(np.pi * grid / 2.0) ** 2
    ders = -np.pi / 2.0 * np.sin(np.pi * grid)
    vals[0] = vals[-1] = 0.0
    ders[0] = ders[-1] = 0.0
    profile = VerticalProfile(grid, vals, ders)
    rep = evaluate_jump_rows(cheap_config, 1.0, profile, 1.0)
    assert rep.tangential_raw == 0.0


def test_jump_rows_negative_control(reference_config, rng):
    profile = random_admissible_profile(rng, 1.0, 1.0, 16)
    rep = evaluate_jump_rows(reference_config, 1.0, profile, 1.0)
    assert rep.tangential_residual > 0.02
    assert rep.normal_residual > 0.02


def test_compare_modes_table(reference_config):
    disc = Discretization(32)
    rows = compare_modes(reference_config, [1.0, math.sqrt(2.0)], disc)
    assert all(r.rel_diff is not None and r.rel_diff < 1e-4 for r in rows)
    lines = comparison_csv_lines(rows)
    assert lines[0] == "k,lambda_oracle,lambda_variational,rel_diff"
    cells = lines[1].split(",")
    assert float(cells[0]) == 1.0
    assert float(cells[3]) < 1e-4


def test_compare_modes_stable_entry(reference_config):
    cfg = reference_config.with_theta(0.5 * theta_critical(reference_config))
    rows = compare_modes(cfg, [2.0], Discretization(16))
    assert rows[0].lambda_variational is None
    assert rows[0].lambda_oracle is None
    assert rows[0].rel_diff is None
    assert comparison_csv_lines(rows)[1] == "2.0,,,"
