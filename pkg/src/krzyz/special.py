"""Laguerre coefficient functions of the one-atom family and related bounds.

beta_j(t) is the j-th Taylor coefficient of exp(t (z - 1)/(z + 1)), the single
atom at theta = pi with weight t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_genlaguerre

from .core import PowerSeries

TWO_OVER_E = 2.0 / math.e


def _binom_falling(top: float, k: int) -> float:
    """binom(top, k) for real ``top`` via the falling factorial."""
    if k < 0:
        return 0.0
    out = 1.0
    for i in range(k):
        out *= (top - i) / (i + 1)
    return out


def laguerre_sum(j: int, alpha: float, x):
    """L_j^(alpha)(x) = sum_k binom(j + alpha, j - k) (-x)^k / k!.

    Exact coefficients, but the alternating sum cancels badly once x >> j.
    """
    if j < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    term = np.ones_like(x)  # (-x)^k / k!
    for k in range(j + 1):
        if k:
            term = term * (-x) / k
        out = out + _binom_falling(j + alpha, j - k) * term
    return out if out.ndim else float(out)


def laguerre(j: int, alpha: float, x):
    """L_j^(alpha)(x) by the three-term recurrence (stable for large x)."""
    if j < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    cur = 1.0 + alpha - x
    if j == 0:
        cur = prev
    for k in range(1, j):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def beta(j: int, t):
    """(-1)^j e^{-t} L_j^(-1)(2t)."""
    t = np.asarray(t, dtype=float)
    val = (-1) ** j * np.exp(-t) * laguerre(j, -1.0, 2.0 * t)
    return val if np.ndim(val) else float(val)


def _beta_slope(j: int, t: float) -> float:
    # d/dt [e^{-t} L_j^(-1)(2t)] = -e^{-t} (2 L_{j-1}^(0)(2t) + L_j^(-1)(2t))
    lp = -laguerre(j - 1, 0.0, 2.0 * t) if j >= 1 else 0.0
    return (-1) ** j * math.exp(-t) * (2.0 * lp - laguerre(j, -1.0, 2.0 * t))


def beta_zeros(j: int) -> np.ndarray:
    """Zeros of beta_j on [0, inf): t = 0 and half the zeros of L_{j-1}^(1)."""
    if j == 0:
        return np.array([])
    if j == 1:
        return np.array([0.0])
    # L_j^(-1)(x) = -(x/j) L_{j-1}^(1)(x)
    x, _ = roots_genlaguerre(j - 1, 1.0)
    return np.concatenate([[0.0], np.sort(x) / 2.0])


@dataclass(frozen=True)
class BetaSup:
    j: int
    t_star: float
    value: float


def beta_sup(j: int) -> BetaSup:
    """Maximize |beta_j| on [0, 4j] by locating a critical point in every gap between zeros."""
    if j < 1:
        raise ValueError("j must be >= 1")
    z = beta_zeros(j)
    hi = max(4.0 * j, z[-1] + 4.0)
    edges = list(z) + [hi]
    best_t, best_v = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        sa, sb = _beta_slope(j, a), _beta_slope(j, b)
        if sa * sb < 0:
            tc = brentq(lambda s: _beta_slope(j, s), a, b, xtol=1e-15, rtol=1e-15, maxiter=200)
        else:
            # no sign change at the right end: the maximum of the last gap sits at hi
            tc = b
        v = abs(beta(j, tc))
        if v > best_v:
            best_t, best_v = tc, v
    return BetaSup(j, float(best_t), float(best_v))


def rooney_bound(j: int) -> float:
    """sqrt(2 (2j)!) / (2^j j!), summed in log space."""
    if j < 0:
        raise ValueError("j must be >= 0")
    log_b = 0.5 * (math.log(2.0) + math.lgamma(2 * j + 1)) - j * math.log(2.0) - math.lgamma(j + 1)
    return math.exp(log_b)


def rooney_below_extremal(j: int) -> bool:
    """True when the Laguerre bound alone rules out beating 2/e with one atom."""
    return rooney_bound(j) < TWO_OVER_E


MASS_BOUNDS = {
    2: 32.0 / math.e**4,
    3: 27.0 / (2.0 * math.e**3),
    4: 96.0 * (33.0 - 19.0 * math.sqrt(3.0)) * math.exp(2.0 * math.sqrt(3.0)) / math.e**6,
}


@dataclass(frozen=True)
class MassCheck:
    k: int
    total: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.total <= self.bound + 1e-12

    def __iter__(self):
        return iter((self.total, self.bound, self.ok))


def mass_bounds_check(series: PowerSeries, k: int) -> MassCheck:
    """|a_1|^2 + ... + |a_k|^2 against the sharp bound for k in {2, 3, 4}."""
    if k not in MASS_BOUNDS:
        raise ValueError(f"k must be one of 2, 3, 4; got {k}")
    if series.order < k:
        raise ValueError(f"series must have order >= {k}")
    total = float(np.sum(np.abs(series.coeffs[1 : k + 1]) ** 2))
    return MassCheck(k, total, MASS_BOUNDS[k])


def mass_extremal_t(k: int) -> tuple[float, float]:
    """Weight t of the one-atom function maximizing sum_{j<=k} beta_j(t)^2, with that sum."""
    if k not in MASS_BOUNDS:
        raise ValueError(f"k must be one of 2, 3, 4; got {k}")

    def mass(t):
        return sum(beta(j, t) ** 2 for j in range(1, k + 1))

    grid = np.linspace(0.0, 4.0 * k, 4000)
    vals = mass(grid)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    # golden-section refinement on the bracketing cell
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    while b - a > 1e-12:
        if mass(c) > mass(d):
            b, d = d, c
            c = b - g * (b - a)
        else:
            a, c = c, d
            d = a + g * (b - a)
    t = 0.5 * (a + b)
    return t, float(mass(t))


RESTRICTED_CONSTANT = (2.0 + math.sqrt(5.0)) * math.exp(-(3.0 + math.sqrt(5.0)) / 2.0)
RESTRICTED_VALUE = 2.0 * RESTRICTED_CONSTANT


def restricted_r0() -> float:
    """Smallest root of r log r = -(2 + sqrt 5) e^{-(3 + sqrt 5)/2}."""
    # r log r decreases on (0, 1/e), so the smallest root is the one in that interval
    return brentq(lambda r: r * math.log(r) + RESTRICTED_CONSTANT, 1e-300, 1.0 / math.e, xtol=1e-16, rtol=1e-15)


@dataclass(frozen=True)
class RestrictedResult:
    r: float
    t_min: float
    two_atom: float  # sup_{t >= t_min} 2 t e^{-t}
    two_atom_t: float
    one_atom: float  # sup_{t >= t_min} |2 t (t - 1) e^{-t}|
    one_atom_t: float

    @property
    def value(self) -> float:
        return max(self.two_atom, self.one_atom)

    @property
    def family(self) -> str:
        if abs(self.two_atom - self.one_atom) <= 1e-9:
            return "tie"
        return "two-atom" if self.two_atom > self.one_atom else "one-atom"


def restricted_problem(r: float | None = None) -> RestrictedResult:
    """Best |a_2| when f(0) = e^{-t} <= r, for the two candidate families.

    Defaults to r = r0, where both families tie.
    """
    r = restricted_r0() if r is None else float(r)
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    s = -math.log(r)
    # 2 t e^{-t} peaks at t = 1 and decreases afterwards
    t2 = max(s, 1.0)
    # |beta_2| has its global max at (3 + sqrt 5)/2 and decreases after it
    t_peak = (3.0 + math.sqrt(5.0)) / 2.0
    t1 = max(s, t_peak)
    return RestrictedResult(
        r=r,
        t_min=s,
        two_atom=2.0 * t2 * math.exp(-t2),
        two_atom_t=t2,
        one_atom=abs(beta(2, t1)),
        one_atom_t=t1,
    )


def beta_table(js) -> str:
    """CSV with columns j, t_star, sup_value, rooney_bound."""
    lines = ["j,t_star,sup_value,rooney_bound"]
    for j in js:
        s = beta_sup(j)
        lines.append(f"{j},{s.t_star!r},{s.value!r},{rooney_bound(j)!r}")
    return "\n".join(lines) + "\n"
