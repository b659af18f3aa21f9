import json
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from krzyz.core import f_series, g_series, make_config, reference_config
from krzyz.reconstruct import (
    a_n_formula,
    b_from_points,
    elementary_symmetric,
    newton_residual,
    reconstruct_f_mod,
    rep_zero_match,
)

E = math.e


def roots_of_minus_one(n):
    return np.exp(1j * math.pi * (2 * np.arange(n) + 1) / n)


def test_elementary_symmetric_against_sympy():
    pts = [1 + 2j, -0.5, 0.3j, 2.0]
    x = sp.Symbol("x")
    poly = sp.Poly(sp.expand(sp.prod([x + sp.nsimplify(p) for p in pts])), x)
    ref = [complex(c) for c in poly.all_coeffs()]
    assert np.allclose(elementary_symmetric(pts), ref, atol=1e-13)


@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=10))
def test_newton_identities(pts):
    scale = max(1.0, max(abs(p) for p in pts)) ** len(pts)
    assert newton_residual(pts) <= 1e-10 * scale * len(pts) ** 2


@pytest.mark.parametrize("n", range(1, 9))
def test_reconstruct_reference(n):
    pts = roots_of_minus_one(n)
    got = reconstruct_f_mod(pts, 1 / E).coeffs
    want = f_series(reference_config(n), n).coeffs
    assert np.max(np.abs(got - want)) <= 1e-12
    assert a_n_formula(pts, 1 / E) == pytest.approx(2 / E)


@pytest.mark.parametrize("n", range(1, 9))
def test_b_from_points_reference(n):
    pts = roots_of_minus_one(n)
    for k in range(1, n):
        assert abs(b_from_points(pts, k)) < 1e-12
    assert b_from_points(pts, n) == pytest.approx(2.0, abs=1e-12)
    # agrees with the series of log f
    b = g_series(reference_config(n), n).coeffs
    assert b_from_points(pts, n) == pytest.approx(b[n], abs=1e-12)


def test_b_bound_random_circle(rng):
    for _ in range(100):
        n = int(rng.integers(1, 12))
        pts = np.exp(1j * rng.uniform(0, 2 * math.pi, n))
        for k in range(1, n + 1):
            assert abs(b_from_points(pts, k)) <= 2 * n / k + 1e-12


def test_b_index_range():
    with pytest.raises(ValueError):
        b_from_points([1j], 2)


def test_reconstruct_rejects_a0():
    with pytest.raises(ValueError):
        reconstruct_f_mod([1j], 0.0)


@pytest.mark.parametrize("n", range(1, 9))
def test_rep_zero_match_reference(n):
    rep = rep_zero_match(reference_config(n))
    assert rep.applicable and rep.match
    assert rep.sup_coeff_error <= 1e-12
    json.dumps(rep.to_dict())


def test_rep_zero_match_not_applicable():
    c = make_config([(0.3, 0.7), (2.0, 0.4)], 3)
    rep = rep_zero_match(c)
    assert not rep.applicable and not rep.match
    assert "not applicable" in rep.status
