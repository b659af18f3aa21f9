import math

import numpy as np
import pytest

from krzyz.boundary import (
    PoleError,
    audit_report,
    atom_adjacent_integral,
    boundary_coefficient,
    ermers_audit,
    intervals,
    level_sets,
    lipschitz_gap,
    negativity_measure,
    phi,
    phi_prime,
    phi_product_form,
    phi_second,
    phi_zeros,
    theorem1_constant,
    vdc_audit,
)
from krzyz.core import coefficient_via_contour, f_series, make_config, reference_config

from .conftest import random_config

E = math.e


def _interior_angles(config, rng, count):
    out = []
    for a, b in intervals(config):
        gap = b - a
        out.extend(a + gap * rng.uniform(0.01, 0.99, count))
    return np.array(out)


# ---------------------------------------------------------------- phi


def test_phi_examples():
    c = reference_config(1)
    assert phi(c, math.pi / 2) == pytest.approx(1.0)
    assert abs(phi(c, 0.0)) < 1e-15
    assert phi_prime(c, 0.0) == pytest.approx(0.5)


def test_phi_pole():
    with pytest.raises(PoleError):
        phi(reference_config(1), math.pi)


def test_phi_derivatives_match_differences(rng):
    c = random_config(rng)
    th = _interior_angles(c, rng, 5)
    h = 1e-6
    assert np.allclose(phi_prime(c, th), (phi(c, th + h) - phi(c, th - h)) / (2 * h), rtol=1e-5)
    assert np.allclose(phi_second(c, th), (phi_prime(c, th + h) - phi_prime(c, th - h)) / (2 * h), rtol=1e-4, atol=1e-4)


def test_phi_prime_positive_and_convex(rng):
    for _ in range(20):
        c = random_config(rng)
        for a, b in intervals(c):
            x, y = a + (b - a) * rng.uniform(0.01, 0.99, (2, 50))
            assert np.all(phi_prime(c, x) > 0)
            mid = phi_prime(c, (x + y) / 2)
            assert np.all(mid <= (phi_prime(c, x) + phi_prime(c, y)) / 2 + 1e-10 * (1 + mid))


def test_phi_increases_across_interval(rng):
    c = random_config(rng)
    for a, b in intervals(c):
        grid = np.linspace(a, b, 202)[1:-1]
        assert np.all(np.diff(phi(c, grid)) > 0)
        assert phi(c, a + 1e-9) < -1e3 * c.total_mass * 0 - 1.0
        assert phi(c, b - 1e-9) > 1.0


# ---------------------------------------------------------------- zeros


def test_phi_zeros_examples():
    assert np.allclose(phi_zeros(reference_config(1)) % (2 * math.pi), [0.0], atol=1e-12) or np.allclose(
        phi_zeros(reference_config(1)), [2 * math.pi], atol=1e-12
    )
    mu = np.sort(phi_zeros(reference_config(2)) % (2 * math.pi))
    assert np.allclose(mu, [0, math.pi], atol=1e-12) or np.allclose(mu, [math.pi, 2 * math.pi], atol=1e-12)


def test_phi_zero_count_and_residual(rng):
    for _ in range(20):
        c = random_config(rng)
        mu = phi_zeros(c)
        assert len(mu) == c.N
        for (a, b), m in zip(intervals(c), mu):
            assert a < m < b
            assert abs(phi(c, m)) <= 1e-10 * (1 + c.total_mass / (b - a))


def test_negativity_measure_is_pi(rng):
    for _ in range(50):
        c = random_config(rng)
        assert negativity_measure(c) == pytest.approx(math.pi, abs=1e-6)


def test_negativity_measure_grid(rng):
    c = random_config(rng, max_atoms=3)
    grid = np.linspace(0, 2 * math.pi, 200001)[:-1]
    grid = grid[np.min(np.abs(np.subtract.outer(grid, c.thetas)), axis=1) > 1e-9]
    frac = np.mean(phi(c, grid) < 0) * 2 * math.pi
    assert frac == pytest.approx(math.pi, abs=1e-3)


def test_product_form(rng):
    for _ in range(20):
        c = random_config(rng)
        th = _interior_angles(c, rng, 10)
        assert np.allclose(phi_product_form(c, th), phi(c, th), rtol=1e-9, atol=1e-9)
    c = reference_config(3)
    assert np.allclose(phi_product_form(c, phi_zeros(c)), 0.0, atol=1e-12)


def test_product_form_single_atom():
    c = reference_config(1)
    assert phi_product_form(c, math.pi / 2) == pytest.approx(1.0)


# ---------------------------------------------------------------- level sets


def test_level_sets_reference_congruent():
    n = 4
    c = reference_config(n)
    ls = level_sets(c, n)
    lens1 = [b - a for a, b in ls.K1]
    lens2 = [b - a for a, b in ls.K2]
    assert len(ls.K1) == 2 * n and len(ls.K2) == n
    assert np.allclose(lens1, lens1[0], atol=1e-10)
    assert np.allclose(lens2, lens2[0], atol=1e-10)
    assert ls.K1.measure + ls.K2.measure <= 2 * math.pi


def test_level_sets_endpoints(rng):
    c = random_config(rng)
    n = c.n
    ls = level_sets(c, n)
    for a, b in ls.K2:
        assert phi_prime(c, a) == pytest.approx(2 * n / 3, rel=1e-9)
        assert phi_prime(c, b) == pytest.approx(2 * n / 3, rel=1e-9)
        assert phi_prime(c, (a + b) / 2) < 2 * n / 3
    for (a, b), (atom, side) in zip(ls.K1, ls.k1_atoms):
        inner_end = b if side > 0 else a
        if b - a > 0:
            assert phi_prime(c, inner_end) == pytest.approx(4 * n / 3, rel=1e-9)


def test_level_sets_empty_K2():
    # one light atom: phi' stays far above the level
    c = make_config([(0.0, 50.0)], 1)
    assert len(level_sets(c, 1).K2) == 0


def test_level_sets_bad_parameters():
    with pytest.raises(ValueError):
        level_sets(reference_config(2), 2, k1=0.9)
    with pytest.raises(ValueError):
        level_sets(reference_config(2), 2, k2=1.2)


def test_ermers_reference_and_random(rng):
    assert ermers_audit(reference_config(4), 4) >= 0
    for _ in range(20):
        assert ermers_audit(random_config(rng)) >= -1e-9


def test_lipschitz_remark(rng):
    for _ in range(10):
        c = random_config(rng)
        a, b = intervals(c)[0]
        x, y = a + (b - a) * rng.uniform(0.05, 0.95, 2)
        assert lipschitz_gap(c, x, y) >= -1e-12


# ---------------------------------------------------------------- oscillatory integrals


def test_boundary_coefficient_reproduces_taylor():
    for n in (1, 2, 3):
        c = reference_config(n)
        assert boundary_coefficient(c) == pytest.approx(2 / E, abs=1e-8)
    c = make_config([(0.5, 0.3), (2.0, 0.9), (4.0, 0.4)], 3)
    a = f_series(c, 3).coeffs
    for j in range(4):
        assert abs(boundary_coefficient(c, j) - a[j]) < 1e-8


def test_fourier_at_radius_reproduces_reference():
    for n in range(1, 7):
        assert coefficient_via_contour(reference_config(n), n, 0.8, 4096) == pytest.approx(2 / E, abs=1e-10)


def test_atom_adjacent_zero_length():
    val, _ = atom_adjacent_integral(reference_config(2), 2, 0, +1, 0.0)
    assert val == 0


def test_vdc_reference_two():
    arcs = vdc_audit(reference_config(2), 2)
    assert arcs and all(a.passed for a in arcs)
    assert sum(abs(a.integral) for a in arcs) <= 4 * 2 / ((4 / 3 - 1) * 2) + 1e-6


def test_vdc_random(rng):
    for _ in range(3):
        c = random_config(rng, max_atoms=4)
        assert all(a.passed for a in vdc_audit(c))


# ---------------------------------------------------------------- constant


def test_theorem1_constant():
    k = theorem1_constant(4 / 3)
    assert k.k2 == pytest.approx(2 / 3, abs=1e-15)
    assert k.c == pytest.approx(2 * math.pi / 7 * (1 / E - 1 / 3), abs=1e-12)
    assert k.branch_max == pytest.approx(2 / 3)


@pytest.mark.parametrize("k1", [1.01, 1.2, 4 / 3, 2.0, 5.0])
def test_theorem1_balanced(k1):
    k = theorem1_constant(k1)
    assert 0 < k.k2 < 1
    assert k.k2 == pytest.approx(k1 / (k1 + k.k2), abs=1e-12)


def test_theorem1_rejects():
    with pytest.raises(ValueError):
        theorem1_constant(1.0)


def test_audit_report_layout():
    rep = audit_report(reference_config(2))
    assert {"K1", "K2", "ermers_slack", "vdc", "c"} <= set(rep)
    assert {"arc", "integral", "bound"} <= set(rep["vdc"][0])
