import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from krzyz.core import f_series, make_config, reference_config
from krzyz.special import (
    MASS_BOUNDS,
    RESTRICTED_VALUE,
    beta,
    beta_sup,
    beta_table,
    beta_zeros,
    laguerre,
    laguerre_sum,
    mass_bounds_check,
    mass_extremal_t,
    restricted_problem,
    restricted_r0,
    rooney_below_extremal,
    rooney_bound,
)

from .conftest import random_config

E = math.e
GOLDEN_T = (3 + math.sqrt(5)) / 2


# ---------------------------------------------------------------- Laguerre


@pytest.mark.parametrize("j", [0, 1, 2, 5, 12])
@pytest.mark.parametrize("alpha", [-1.0, 0.0, 1.0, 2.5])
def test_laguerre_against_mpmath(j, alpha):
    xs = np.array([0.0, 0.3, 1.7, 6.0, 15.0])
    ref = np.array([float(mpmath.laguerre(j, alpha, x, zeroprec=200)) for x in xs])
    assert np.allclose(laguerre(j, alpha, xs), ref, rtol=1e-11, atol=1e-11)
    assert np.allclose(laguerre_sum(j, alpha, xs[:4]), ref[:4], rtol=1e-9, atol=1e-9)


def test_laguerre_large_x_stable():
    x = 200.0
    ref = float(mpmath.laguerre(60, -1, x))
    assert laguerre(60, -1.0, x) == pytest.approx(ref, rel=1e-9)


def test_beta_closed_forms():
    t = np.linspace(0, 8, 17)
    assert np.allclose(beta(0, t), np.exp(-t))
    assert np.allclose(beta(1, t), 2 * t * np.exp(-t))
    assert np.allclose(beta(2, t), 2 * t * (t - 1) * np.exp(-t))


@pytest.mark.parametrize("t", [0.2, 1.0, 2.5, 7.0])
def test_beta_is_single_atom_coefficient(t):
    a = f_series(make_config([(math.pi, t)], 1), 12).coeffs
    for j in range(13):
        assert beta(j, t) == pytest.approx(a[j].real, abs=1e-12)
        assert abs(a[j].imag) < 1e-12


def test_beta_zeros():
    for j in range(1, 15):
        z = beta_zeros(j)
        assert len(z) == j
        assert z[0] == 0.0
        assert np.max(np.abs(beta(j, z))) < 1e-10


# ---------------------------------------------------------------- suprema


def test_beta_sup_two():
    s = beta_sup(2)
    assert s.t_star == pytest.approx(GOLDEN_T, abs=1e-9)
    assert s.value == pytest.approx(0.61801, abs=1e-5)
    assert s.value == pytest.approx(RESTRICTED_VALUE, abs=1e-13)


@pytest.mark.parametrize("j, value", [(1, 2 / E), (3, 0.55191), (4, 0.50755)])
def test_beta_sup_values(j, value):
    assert beta_sup(j).value == pytest.approx(value, abs=1e-5)


@pytest.mark.parametrize("j", [3, 6, 10])
def test_beta_sup_beats_grid(j):
    s = beta_sup(j)
    grid = np.linspace(0, 6 * j + 10, 200001)
    assert s.value >= np.max(np.abs(beta(j, grid))) - 1e-12


def test_beta_sup_rejects():
    with pytest.raises(ValueError):
        beta_sup(0)


# ---------------------------------------------------------------- Rooney


def test_rooney_values():
    assert rooney_bound(1) == pytest.approx(1.0)
    assert rooney_bound(5) == pytest.approx(0.70156, abs=1e-5)
    assert not rooney_below_extremal(4)
    assert all(rooney_below_extremal(j) for j in range(5, 41))


@pytest.mark.parametrize("j", [5, 9, 20, 40])
def test_rooney_dominates_samples(j):
    t = np.linspace(0, 10 * j, 5000)
    assert np.max(np.abs(beta(j, t))) <= rooney_bound(j)


def test_beta_table_csv():
    rows = beta_table([2, 3]).strip().splitlines()
    assert rows[0] == "j,t_star,sup_value,rooney_bound"
    assert rows[1].startswith("2,")


# ---------------------------------------------------------------- coefficient mass


def test_mass_bound_equality_single_atom():
    a = f_series(make_config([(0.0, 2.0)], 2), 2)
    chk = mass_bounds_check(a, 2)
    assert chk.ok
    assert chk.total == pytest.approx(32 / E**4, abs=1e-10)


@pytest.mark.parametrize("k, t", [(2, 2.0), (3, 1.5), (4, 3 - math.sqrt(3))])
def test_mass_extremal_t(k, t):
    tt, val = mass_extremal_t(k)
    assert tt == pytest.approx(t, abs=1e-6)
    assert val == pytest.approx(MASS_BOUNDS[k], abs=1e-10)


def test_mass_bounds_random(rng):
    for _ in range(50):
        c = random_config(rng)
        s = f_series(c, 4)
        for k in (2, 3, 4):
            assert mass_bounds_check(s, k).ok


def test_mass_bounds_bad_k():
    with pytest.raises(ValueError):
        mass_bounds_check(f_series(reference_config(1), 6), 5)


# ---------------------------------------------------------------- restricted problem


def test_restricted_r0():
    r0 = restricted_r0()
    assert r0 == pytest.approx(0.18047, abs=1e-5)
    assert r0 * math.log(r0) == pytest.approx(-RESTRICTED_VALUE / 2, abs=1e-14)


def test_restricted_tie():
    res = restricted_problem()
    assert res.family == "tie"
    assert res.two_atom == pytest.approx((4 + 2 * math.sqrt(5)) * math.exp(-GOLDEN_T), abs=1e-12)
    assert res.one_atom == pytest.approx(res.two_atom, abs=1e-12)


def test_restricted_families():
    assert restricted_problem(1 / E).family == "two-atom"
    assert restricted_problem(1 / E).value == pytest.approx(2 / E)
    assert restricted_problem(0.01).family == "one-atom"
    with pytest.raises(ValueError):
        restricted_problem(1.5)


@given(st.floats(1e-4, 0.99))
def test_restricted_value_monotone(r):
    # a looser constraint can only help
    assert restricted_problem(r).value <= restricted_problem(min(0.999, r * 1.01)).value + 1e-15
