"""Coefficient identities and closed formulas that hold at stationary configurations.

All routines evaluate on any config; agreement with the direct series is only
expected when the config is stationary for Re a_n and rotation-normalised so
that a_n is real and positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import AtomicConfig, f_series, g_series
from .polyalg import ComplexPoly, build_P, build_Q, roots, winding_number, BoundaryRootError

DENOM_TOL = 1e-12


@dataclass(frozen=True)
class StationarityReport:
    re_p: np.ndarray  # Re P(alpha_k)
    im_t: np.ndarray  # Im(alpha_k P'(alpha_k))

    @property
    def max_residual(self) -> float:
        return float(max(np.max(np.abs(self.re_p)), np.max(np.abs(self.im_t))))

    def to_dict(self) -> dict:
        return {
            "re_P": [float(x) for x in self.re_p],
            "im_alphaPprime": [float(x) for x in self.im_t],
            "max_residual": self.max_residual,
        }


@dataclass(frozen=True)
class IdentityResidual:
    r: int
    kind: str
    value: complex


def residual_identity(config: AtomicConfig, r: int, kind: str = "base") -> complex:
    """LHS - RHS of the r-th vanishing identity ("base") or its derivative form.

    base:       sum_{j=0}^n a_{n-j} b_{r+j}
                  + sum_{j=1}^n conj(a_{n-j}) b_{r-j} + conj(a_{n-r}) b_0 [0 <= r <= n]
    derivative: sum_{j=1}^n j a_{n-j} b_{r+j}
                  - sum_{j=1}^n j conj(a_{n-j}) b_{r-j} - r conj(a_{n-r}) b_0 [1 <= r <= n]

    with b_{-j} = conj(b_j).
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    n = config.n
    order = n + r
    a = f_series(config, order).coeffs
    b = g_series(config, order).coeffs

    def bb(k: int) -> complex:
        return b[k] if k >= 0 else np.conj(b[-k])

    j = np.arange(1, n + 1)
    b_minus = np.array([bb(r - k) for k in j])
    conj_a = np.conj(a[n - j])
    if kind == "base":
        lhs = np.sum(a[n - np.arange(n + 1)] * b[r + np.arange(n + 1)])
        rhs = -np.sum(conj_a * b_minus)
        if 0 <= r <= n:
            rhs -= np.conj(a[n - r]) * b[0]
    elif kind == "derivative":
        lhs = np.sum(j * a[n - j] * b[r + j])
        rhs = np.sum(j * conj_a * b_minus)
        if 1 <= r <= n:
            rhs += r * np.conj(a[n - r]) * b[0]
    else:
        raise ValueError(f"unknown identity kind {kind!r}")
    return complex(lhs - rhs)


def identity_residuals(config: AtomicConfig, r_max: int | None = None) -> list[IdentityResidual]:
    r_max = 2 * config.n if r_max is None else r_max
    return [
        IdentityResidual(r, kind, residual_identity(config, r, kind))
        for r in range(r_max + 1)
        for kind in ("base", "derivative")
    ]


def _reflect(p: ComplexPoly, n: int, sign: float, weighted: bool = False) -> ComplexPoly:
    """sum_k w_k p_k z^{n-k} + sign * sum_k w_k conj(p_k) z^{n+k}, w_k = k or 1.

    This is z^n P(1/z) + sign z^n conj(P(conj z)) (or the P' analogue)
    assembled as one degree-2n polynomial.
    """
    c = np.zeros(2 * n + 1, dtype=complex)
    pk = np.zeros(n + 1, dtype=complex)
    pk[: min(n + 1, len(p.coeffs))] = p.coeffs[: n + 1]
    w = np.arange(n + 1) if weighted else np.ones(n + 1)
    k = np.arange(n + 1)
    np.add.at(c, n - k, w * pk)
    np.add.at(c, n + k, sign * w * np.conj(pk))
    return ComplexPoly(c)


@dataclass(frozen=True)
class ThmXPolys:
    g_num: ComplexPoly
    zg_num: ComplexPoly
    den: ComplexPoly
    n: int


def thmx_polys(config: AtomicConfig) -> ThmXPolys:
    n = config.n
    P, Q = build_P(config), build_Q(config)
    return ThmXPolys(
        g_num=_reflect(Q, n, -1.0),
        zg_num=_reflect(P, n, +1.0, weighted=True),
        den=_reflect(P, n, +1.0),
        n=n,
    )


def _denominator(polys: ThmXPolys, z) -> np.ndarray:
    den = polys.den(z)
    if np.any(np.abs(den) < DENOM_TOL):
        raise ZeroDivisionError("denominator z^n P(1/z) + z^n conj(P(conj z)) vanishes")
    return den


def g_from_PQ(config: AtomicConfig, z, polys: ThmXPolys | None = None):
    """(z^n Q(1/z) - z^n conj(Q(conj z))) / (z^n P(1/z) + z^n conj(P(conj z)))."""
    polys = thmx_polys(config) if polys is None else polys
    z = np.asarray(z, dtype=complex)
    return polys.g_num(z) / _denominator(polys, z)


def zgprime_from_P(config: AtomicConfig, z, polys: ThmXPolys | None = None):
    """n - (z^{n-1} P'(1/z) + z^{n+1} conj(P'(conj z))) / (z^n P(1/z) + z^n conj(P(conj z)))."""
    polys = thmx_polys(config) if polys is None else polys
    z = np.asarray(z, dtype=complex)
    return polys.n - polys.zg_num(z) / _denominator(polys, z)


def _re_p_on_circle(P: ComplexPoly, theta):
    w = np.exp(-1j * np.asarray(theta, dtype=float))
    re_p = np.real(P(w))
    if np.any(np.abs(re_p) < DENOM_TOL):
        raise ZeroDivisionError("Re P vanishes: theta is at (or next to) an atom")
    return w, re_p


def phi_from_PQ(config: AtomicConfig, theta):
    """Im Q(e^{-i theta}) / Re P(e^{-i theta})."""
    P, Q = build_P(config), build_Q(config)
    w, re_p = _re_p_on_circle(P, theta)
    return np.imag(Q(w)) / re_p


def phi_prime_from_P(config: AtomicConfig, theta):
    """n - Re(e^{-i theta} P'(e^{-i theta})) / Re P(e^{-i theta})."""
    P = build_P(config)
    w, re_p = _re_p_on_circle(P, theta)
    return config.n - np.real(w * P.deriv()(w)) / re_p


def first_order_conditions(config: AtomicConfig, P: ComplexPoly | None = None) -> StationarityReport:
    P = build_P(config) if P is None else P
    al = config.alphas
    return StationarityReport(np.real(P(al)), np.imag(al * P.deriv()(al)))


@dataclass(frozen=True)
class LowerBound:
    m: int
    N: int
    ok: bool
    all_inside: bool  # every root of P' lies in D, which forces N = n
    ambiguous: bool  # some root of P' sits within 1e-6 of the circle
    winding: int | None

    def to_dict(self) -> dict:
        return dict(m=self.m, N=self.N, ok=self.ok, all_inside=self.all_inside,
                    ambiguous=self.ambiguous, winding=self.winding)


def n_lower_bound(config: AtomicConfig, boundary_tol: float = 1e-6) -> LowerBound:
    """m = number of zeros of z P'(z) in D; extremality forces N >= m."""
    dP = build_P(config).deriv()
    if dP.degree == 0:
        rts = np.array([], dtype=complex)
    else:
        rts = roots(dP)
    mod = np.abs(rts)
    ambiguous = bool(np.any(np.abs(mod - 1.0) < boundary_tol))
    radius = 1.0 - boundary_tol if ambiguous else 1.0
    m = 1 + int(np.sum(mod < radius))
    all_inside = bool(len(rts) == config.n - 1 and np.all(mod < radius))
    winding = None
    if not ambiguous:
        try:
            winding = winding_number(dP)
        except BoundaryRootError:
            winding = None
    return LowerBound(m, config.N, config.N >= m, all_inside, ambiguous, winding)


def series_order_for(radius: float, scale: float = 1.0, tol: float = 1e-15) -> int:
    """Truncation order M with scale * M * radius^M below tol."""
    if radius <= 0.0:
        return 8
    m = 8
    while scale * (m + 1) * radius**m / max(1e-300, 1 - radius) > tol:
        m += 8
    return m


def thmx_errors(config: AtomicConfig, z: np.ndarray) -> tuple[float, float]:
    """Sup errors of both closed forms against g and z g' summed from g_series."""
    z = np.asarray(z, dtype=complex)
    M = series_order_for(float(np.max(np.abs(z))), scale=2 * config.total_mass + 1)
    g = g_series(config, M)
    direct_g = g(z)
    direct_zg = z * g.deriv()(z)
    polys = thmx_polys(config)
    eg = float(np.max(np.abs(g_from_PQ(config, z, polys) - direct_g)))
    ez = float(np.max(np.abs(zgprime_from_P(config, z, polys) - direct_zg)))
    return eg, ez


def random_disk_points(rng: np.random.Generator, count: int, rmax: float = 0.9) -> np.ndarray:
    r = rmax * np.sqrt(rng.uniform(0, 1, count))
    return r * np.exp(2j * math.pi * rng.uniform(0, 1, count))


def verification_report(config: AtomicConfig, seed: int = 0, points: int = 100) -> dict:
    rng = np.random.default_rng(seed)
    z = random_disk_points(rng, points)
    eg, ez = thmx_errors(config, z)
    lb = n_lower_bound(config)
    return {
        "stationarity": first_order_conditions(config).to_dict(),
        "identities": [
            {"r": ir.r, "kind": ir.kind, "abs": abs(ir.value)} for ir in identity_residuals(config)
        ],
        "thmX_sup_error": max(eg, ez),
        "thmX_g_error": eg,
        "thmX_zgprime_error": ez,
        "m_lower_bound": lb.m,
        "lower_bound": lb.to_dict(),
    }
