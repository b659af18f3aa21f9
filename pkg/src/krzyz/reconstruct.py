"""Rebuild f mod z^{n+1} from the circle zeros of Re P.

At a stationary configuration with n distinct zeros z_1..z_n of Re P on the
circle, f = a_0 prod (1 - z_j z)^2 mod z^{n+1}, so a_j is a quadratic form in
the elementary symmetric polynomials of the z_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import AtomicConfig, PowerSeries, f_series, g_series
from .polyalg import FactorizationError, TrigPolyReal, build_P, fejer_riesz

MATCH_TOL = 1e-6
COEFF_TOL = 1e-8


def elementary_symmetric(points) -> np.ndarray:
    """e_0..e_n of the points, read off prod (x + w_j) one factor at a time."""
    w = np.asarray(points, dtype=complex).ravel()
    e = np.zeros(len(w) + 1, dtype=complex)
    e[0] = 1.0
    for k, wk in enumerate(w, start=1):
        # e_j <- e_j + w_k e_{j-1}, updated from the top down
        e[1 : k + 1] = e[1 : k + 1] + wk * e[0:k]
    return e


def reconstruct_f_mod(points, a0: float) -> PowerSeries:
    """a_j = (-1)^j a_0 sum_{k=0}^j e_{j-k} e_k for j = 0..n."""
    if a0 <= 0:
        raise ValueError("a0 must be positive")
    e = elementary_symmetric(points)
    n = len(e) - 1
    conv = np.convolve(e, e)[: n + 1]
    sign = (-1.0) ** np.arange(n + 1)
    return PowerSeries(a0 * sign * conv)


def b_from_points(points, k: int) -> complex:
    """b_k = -(2/k) sum_j z_j^k, valid for 1 <= k <= n."""
    w = np.asarray(points, dtype=complex).ravel()
    n = len(w)
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    return complex(-2.0 / k * np.sum(w**k))


def power_sums(points, kmax: int) -> np.ndarray:
    w = np.asarray(points, dtype=complex).ravel()
    return np.array([np.sum(w**k) for k in range(1, kmax + 1)])


def newton_residual(points) -> float:
    """max_k |k e_k - sum_{i=1}^k (-1)^{i-1} e_{k-i} p_i| over k = 1..n."""
    e = elementary_symmetric(points)
    n = len(e) - 1
    p = power_sums(points, n)
    worst = 0.0
    for k in range(1, n + 1):
        s = sum((-1) ** (i - 1) * e[k - i] * p[i - 1] for i in range(1, k + 1))
        worst = max(worst, abs(k * e[k] - s))
    return worst


def a_n_formula(points, a0: float) -> float:
    """a_0 (2 + sum_{k=1}^{n-1} |e_k|^2); equals a_n when prod z_j = (-1)^n."""
    e = elementary_symmetric(points)
    return float(a0 * (2.0 + np.sum(np.abs(e[1:-1]) ** 2)))


@dataclass
class ZeroMatchReport:
    applicable: bool
    status: str
    points: np.ndarray = field(default_factory=lambda: np.array([], complex))
    atoms_matched: bool = False
    product_check: float | None = None
    a_n_formula: float | None = None
    b_error: float | None = None
    sup_coeff_error: float | None = None

    @property
    def match(self) -> bool:
        return bool(
            self.applicable
            and self.atoms_matched
            and self.sup_coeff_error is not None
            and self.sup_coeff_error <= COEFF_TOL
            and self.b_error is not None
            and self.b_error <= COEFF_TOL
        )

    def to_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "status": self.status,
            "points": [[float(w.real), float(w.imag)] for w in self.points],
            "atoms_matched": self.atoms_matched,
            "product_check": self.product_check,
            "a_n_formula": self.a_n_formula,
            "b_error": self.b_error,
            "match": self.match,
            "sup_coeff_error": self.sup_coeff_error,
        }


def _distinct(points: np.ndarray, tol: float) -> np.ndarray:
    out: list[complex] = []
    for w in points:
        if all(abs(w - u) > tol for u in out):
            out.append(w)
    return np.asarray(out, dtype=complex)


def rep_zero_match(config: AtomicConfig) -> ZeroMatchReport:
    """Factor Re P on the circle, match atoms to its zeros, and rebuild f mod z^{n+1}."""
    n = config.n
    T = TrigPolyReal.real_part_on_circle(build_P(config))
    try:
        fac = fejer_riesz(T)
    except FactorizationError as exc:
        return ZeroMatchReport(False, f"not applicable: {exc}")
    pts = _distinct(fac.circle_roots, MATCH_TOL)
    alphas = config.alphas
    if len(pts):
        dist = np.abs(alphas[:, None] - pts[None, :]).min(axis=1)
        matched = bool(np.all(dist <= MATCH_TOL))
    else:
        matched = False
    if len(pts) != n:
        return ZeroMatchReport(
            False,
            f"not applicable: {len(pts)} distinct circle zeros, need {n}",
            points=pts,
            atoms_matched=matched,
        )
    a = f_series(config, n)
    b = g_series(config, n)
    rebuilt = reconstruct_f_mod(pts, float(a[0].real))
    coeff_err = float(np.max(np.abs(rebuilt.coeffs - a.coeffs)))
    b_err = max(abs(b_from_points(pts, k) - b[k]) for k in range(1, n + 1))
    return ZeroMatchReport(
        True,
        "ok",
        points=pts,
        atoms_matched=matched,
        product_check=float(abs(np.prod(pts) - (-1.0) ** n)),
        a_n_formula=a_n_formula(pts, float(a[0].real)),
        b_error=float(b_err),
        sup_coeff_error=coeff_err,
    )
