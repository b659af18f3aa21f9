"""Boundary phase phi and the oscillatory-integral audit for the N >= cn bound.

On the circle f(e^{i theta}) = exp(i phi(theta)) with

    phi(theta) = -sum_k lam_k cot((theta - theta_k) / 2),

which increases from -inf to +inf between consecutive atoms.  The audit
partitions the circle into K1 = {phi' > k1 n} and K2 = {phi' < k2 n}, checks
the Ermers measure inequality, and integrates exp(i(phi - n theta)) over the
arcs of K1 to compare against the van der Corput bound 2 / ((k1 - 1) n).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .core import TWO_PI, AtomicConfig

POLE_TOL = 1e-12
ENDPOINT_XTOL = 1e-12


class PoleError(ValueError):
    """Evaluation requested at (or numerically on top of) an atom."""


class QuadratureError(RuntimeError):
    def __init__(self, message: str, arc=None):
        super().__init__(message if arc is None else f"{message} on arc {arc}")
        self.arc = arc


def _offsets(config: AtomicConfig, theta):
    theta = np.asarray(theta, dtype=float)
    d = np.subtract.outer(theta, config.thetas)
    d = np.mod(d + math.pi, TWO_PI) - math.pi
    if np.any(np.abs(d) < POLE_TOL):
        raise PoleError("phase function evaluated at an atom")
    return d


def phi(config: AtomicConfig, theta):
    d = _offsets(config, theta)
    return -np.sum(config.lambdas / np.tan(d / 2.0), axis=-1)


def phi_prime(config: AtomicConfig, theta):
    d = _offsets(config, theta)
    return np.sum(config.lambdas / (2.0 * np.sin(d / 2.0) ** 2), axis=-1)


def phi_second(config: AtomicConfig, theta):
    d = _offsets(config, theta)
    s = np.sin(d / 2.0)
    return -np.sum(config.lambdas * np.cos(d / 2.0) / (2.0 * s**3), axis=-1)


def intervals(config: AtomicConfig) -> list[tuple[float, float]]:
    """Consecutive atom pairs (theta_j, theta_{j+1}), the last one wrapping past 2 pi."""
    th = config.thetas
    nxt = np.append(th[1:], th[0] + TWO_PI)
    return [(float(a), float(b)) for a, b in zip(th, nxt)]


def _bracket_root(fun, a: float, b: float) -> float:
    """Root of a function increasing from -inf (at a) to +inf (at b)."""
    gap = b - a
    eps = 1e-3 * gap
    lo, hi = a + eps, b - eps
    while fun(lo) > 0:
        eps *= 1e-3
        lo = a + eps
    eps = 1e-3 * gap
    while fun(hi) < 0:
        eps *= 1e-3
        hi = b - eps
    return optimize.brentq(fun, lo, hi, xtol=ENDPOINT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=500)


def phi_zeros(config: AtomicConfig) -> np.ndarray:
    """The single zero mu_j of phi in each interval (theta_j, theta_{j+1}).

    Values are left unreduced, so theta_j < mu_j < theta_{j+1} holds literally.
    """
    out = []
    for a, b in intervals(config):
        x = _bracket_root(lambda x: float(phi(config, x)), a, b)
        # brentq stops at xtol; phi' can be huge in narrow gaps, so finish with Newton
        for _ in range(3):
            x_new = x - float(phi(config, x)) / float(phi_prime(config, x))
            if not a < x_new < b:
                break
            x = x_new
        out.append(x)
    return np.array(out)


def negativity_measure(config: AtomicConfig, mu: np.ndarray | None = None) -> float:
    """|{phi < 0}| = sum_j (mu_j - theta_j)."""
    if mu is None:
        mu = phi_zeros(config)
    return float(np.sum(mu - config.thetas))


def phi_product_form(config: AtomicConfig, theta, mu: np.ndarray | None = None):
    """t prod sin((theta - mu_j)/2) / prod sin((theta - theta_j)/2).

    The sign needs no calibration provided mu_j is taken in (theta_j, theta_{j+1})
    without reduction, which is how :func:`phi_zeros` returns it.
    """
    if mu is None:
        mu = phi_zeros(config)
    theta = np.asarray(theta, dtype=float)
    _offsets(config, theta)
    num = np.prod(np.sin(np.subtract.outer(theta, mu) / 2.0), axis=-1)
    den = np.prod(np.sin(np.subtract.outer(theta, config.thetas) / 2.0), axis=-1)
    return config.total_mass * num / den


# --------------------------------------------------------------------------
# level sets


@dataclass
class IntervalSet:
    """Disjoint arcs (a, b) with a < b, stored unreduced (b may exceed 2 pi)."""

    arcs: list[tuple[float, float]] = field(default_factory=list)

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.arcs))

    def __len__(self) -> int:
        return len(self.arcs)

    def __iter__(self):
        return iter(self.arcs)

    def contains(self, theta: float) -> bool:
        x = theta % TWO_PI
        for a, b in self.arcs:
            for y in (x, x + TWO_PI, x - TWO_PI):
                if a < y < b:
                    return True
        return False


@dataclass
class LevelSets:
    K1: IntervalSet
    K2: IntervalSet
    turning_points: list[float]  # argmin of phi' per interval
    # (atom angle, side) for each K1 arc: side +1 means the atom is the left end
    k1_atoms: list[tuple[float, int]]


def _phi_prime_min(config: AtomicConfig, a: float, b: float) -> float:
    """phi'' rises from -inf to inf on (a, b); its zero is where convex phi' bottoms out."""
    return _bracket_root(lambda x: float(phi_second(config, x)), a, b)


def _solve_level(config: AtomicConfig, level: float, lo: float, hi: float) -> float:
    g = lambda x: float(phi_prime(config, x)) - level
    return optimize.brentq(g, lo, hi, xtol=ENDPOINT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=500)


def _near_atom(config: AtomicConfig, atom: float, toward: float, level: float) -> float:
    """A point between ``atom`` and ``toward`` where phi' exceeds ``level``."""
    eps = 1e-3 * (toward - atom)
    x = atom + eps
    while float(phi_prime(config, x)) <= level:
        eps *= 1e-2
        x = atom + eps
        if abs(eps) < 1e-14:
            break
    return x


def level_sets(config: AtomicConfig, n: int | None = None, k1: float = 4 / 3, k2: float = 2 / 3) -> LevelSets:
    if not k1 > 1.0:
        raise ValueError("k1 must exceed 1")
    if not 0.0 < k2 < 1.0:
        raise ValueError("k2 must lie in (0, 1)")
    n = config.n if n is None else n
    K1, K2, turns, k1_atoms = [], [], [], []
    hi_level, lo_level = k1 * n, k2 * n
    for a, b in intervals(config):
        m = _phi_prime_min(config, a, b)
        turns.append(m)
        pmin = float(phi_prime(config, m))
        if pmin >= hi_level:
            left_end = right_start = m
        else:
            left_end = _solve_level(config, hi_level, _near_atom(config, a, m, hi_level), m)
            right_start = _solve_level(config, hi_level, m, _near_atom(config, b, m, hi_level))
        K1.append((a, left_end))
        k1_atoms.append((a, +1))
        K1.append((right_start, b))
        k1_atoms.append((b, -1))
        if pmin < lo_level:
            y0 = _solve_level(config, lo_level, _near_atom(config, a, m, lo_level), m)
            y1 = _solve_level(config, lo_level, m, _near_atom(config, b, m, lo_level))
            K2.append((y0, y1))
    return LevelSets(IntervalSet(K1), IntervalSet(K2), turns, k1_atoms)


def ermers_audit(config: AtomicConfig, n: int | None = None, k1: float = 4 / 3, k2: float = 2 / 3,
                 sets: LevelSets | None = None) -> float:
    """Slack ((k1 + k2)/k2)|K1| + |K2| - 2 pi of the Ermers measure inequality."""
    if sets is None:
        sets = level_sets(config, n, k1, k2)
    return (k1 + k2) / k2 * sets.K1.measure + sets.K2.measure - TWO_PI


def lipschitz_gap(config: AtomicConfig, x: float, y: float) -> float:
    """sqrt(phi'(x) phi'(y)) |x - y| - |phi(x) - phi(y)|, non-negative within one interval."""
    px, py = float(phi(config, x)), float(phi(config, y))
    return abs(x - y) * math.sqrt(float(phi_prime(config, x)) * float(phi_prime(config, y))) - abs(px - py)


# --------------------------------------------------------------------------
# oscillatory integrals


def _cot_defect(x: np.ndarray) -> np.ndarray:
    """1/x - cot(x), stable for small x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-2
    xs = x[small]
    out[small] = xs / 3 + xs**3 / 45 + 2 * xs**5 / 945
    xl = x[~small]
    out[~small] = 1.0 / xl - 1.0 / np.tan(xl)
    return out


def _quad_complex(fun, a, b, arc, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            re, ere = integrate.quad(lambda x: fun(x).real, a, b, **kw)
            im, eim = integrate.quad(lambda x: fun(x).imag, a, b, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature did not converge ({exc})", arc) from exc
    return complex(re, im), ere + eim


def _fourier_tail(amp, v0, omega, sign, arc):
    """int_{v0}^inf amp(v) exp(i sign omega v) dv for a slowly varying, decaying amp."""
    parts = {}
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            for key, part in (("r", lambda v: amp(v).real), ("i", lambda v: amp(v).imag)):
                c, ec = integrate.quad(part, v0, np.inf, weight="cos", wvar=omega, limlst=200)
                s, es = integrate.quad(part, v0, np.inf, weight="sin", wvar=omega, limlst=200)
                parts[key] = (c, s, ec + es)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"Fourier tail did not converge ({exc})", arc) from exc
    rc, rs, er = parts["r"]
    ic, is_, ei = parts["i"]
    # (A_r + i A_i)(cos + i sign sin)
    val = complex(rc - sign * is_, ic + sign * rs)
    return val, er + ei


def atom_adjacent_integral(config: AtomicConfig, n: int, atom_index: int, side: int, length: float,
                           s_cut: float = 0.05) -> tuple[complex, float]:
    """int exp(i(phi(theta) - n theta)) over the arc of ``length`` touching an atom.

    ``side`` = +1 integrates over (theta_a, theta_a + length), -1 over
    (theta_a - length, theta_a).  Within ``s_cut`` of the atom the substitution
    s = 1/v turns the singular phase -(side) 2 lam cot(s/2) into a pure Fourier
    weight exp(-i side 2 lam v) with a 1/v^2 amplitude, integrated on [1/s_cut, inf).
    Returns (value, error estimate).
    """
    arc = (config.thetas[atom_index], side, length)
    if length <= 0.0:
        return 0j, 0.0
    th_a = float(config.thetas[atom_index])
    lam_a = float(config.lambdas[atom_index])
    others = np.delete(np.arange(config.N), atom_index)
    lam_o = config.lambdas[others]
    th_o = config.thetas[others]
    gaps = np.abs(np.mod(th_o - th_a + math.pi, TWO_PI) - math.pi)
    s_c = min(length, s_cut, 0.25 * float(np.min(gaps))) if len(gaps) else min(length, s_cut)

    def phi_other(theta):
        if not len(lam_o):
            return np.zeros_like(theta)
        return -np.sum(lam_o / np.tan(np.subtract.outer(theta, th_o) / 2.0), axis=-1)

    def integrand_s(s):
        theta = th_a + side * s
        ph = -side * lam_a / math.tan(s / 2.0) + float(phi_other(np.array(theta)))
        return np.exp(1j * (ph - n * theta))

    far, err_far = 0j, 0.0
    if length > s_c:
        far, err_far = _quad_complex(integrand_s, s_c, length, arc, limit=500, epsabs=1e-12, epsrel=1e-10)

    def amp(v):
        s = 1.0 / v
        theta = th_a + side * s
        smooth = side * lam_a * float(_cot_defect(np.array(s / 2.0))) + float(phi_other(np.array(theta)))
        return np.exp(1j * (smooth - n * theta)) / v**2

    near, err_near = _fourier_tail(amp, 1.0 / s_c, 2.0 * lam_a, -side, arc)
    return far + near, err_far + err_near


def boundary_coefficient(config: AtomicConfig, j: int | None = None) -> complex:
    """(1/2 pi) int_0^{2 pi} exp(i phi) e^{-i j theta} d theta, split at interval midpoints.

    Equals the Taylor coefficient a_j; used to check the arc integrator.
    """
    j = config.n if j is None else j
    total = 0j
    for k, (a, b) in enumerate(intervals(config)):
        half = 0.5 * (b - a)
        total += atom_adjacent_integral(config, j, k, +1, half)[0]
        total += atom_adjacent_integral(config, j, (k + 1) % config.N, -1, half)[0]
    return total / TWO_PI


@dataclass
class ArcCheck:
    arc: tuple[float, float]
    integral: complex
    bound: float
    error_estimate: float

    @property
    def passed(self) -> bool:
        return abs(self.integral) <= self.bound + 1e-6


def vdc_audit(config: AtomicConfig, n: int | None = None, k1: float = 4 / 3,
              sets: LevelSets | None = None) -> list[ArcCheck]:
    """Integrate exp(i(phi - n theta)) on each K1 arc against the bound 2/((k1 - 1) n).

    K1 arcs are already split at the turning point of phi', so phi'' has a
    fixed sign on each of them.
    """
    n = config.n if n is None else n
    if sets is None:
        sets = level_sets(config, n, k1, 0.5 * (-k1 + math.sqrt(k1 * k1 + 4 * k1)))
    bound = 2.0 / ((k1 - 1.0) * n)
    index = {float(t): i for i, t in enumerate(config.thetas)}
    out = []
    for (a, b), (atom, side) in zip(sets.K1.arcs, sets.k1_atoms):
        key = atom if atom < TWO_PI else atom - TWO_PI
        i = index.get(float(key))
        if i is None:
            i = int(np.argmin(np.abs(np.mod(config.thetas - key + math.pi, TWO_PI) - math.pi)))
        val, err = atom_adjacent_integral(config, n, i, side, b - a)
        out.append(ArcCheck((a, b), val, bound, err))
    return out


@dataclass
class Theorem1Constant:
    k1: float
    k2: float
    c: float
    branch_max: float  # max{k2, k1/(k1 + k2)}
    n_coefficient: float  # (k1 + 1) / (pi (k1 - 1))


def theorem1_constant(k1: float = 4 / 3) -> Theorem1Constant:
    """Balanced k2 = (-k1 + sqrt(k1^2 + 4 k1))/2 and the resulting c with N >= c n.

    The chain reads 2/e <= k2 + (N / (pi n)) (k1 + 1)/(k1 - 1), so
    c = pi (k1 - 1)/(k1 + 1) (2/e - k2).
    """
    if not k1 > 1.0:
        raise ValueError("k1 must exceed 1")
    k2 = 0.5 * (-k1 + math.sqrt(k1 * k1 + 4.0 * k1))
    coef = (k1 + 1.0) / (math.pi * (k1 - 1.0))
    c = (2.0 / math.e - k2) / coef
    return Theorem1Constant(k1, k2, c, max(k2, k1 / (k1 + k2)), coef)


def audit_report(config: AtomicConfig, n: int | None = None, k1: float = 4 / 3) -> dict:
    """Everything the audit computes, in the JSON layout used by the CLI."""
    n = config.n if n is None else n
    const = theorem1_constant(k1)
    sets = level_sets(config, n, k1, const.k2)
    arcs = vdc_audit(config, n, k1, sets)
    return {
        "n": n,
        "k1": k1,
        "k2": const.k2,
        "K1": [[a, b] for a, b in sets.K1.arcs],
        "K2": [[a, b] for a, b in sets.K2.arcs],
        "ermers_slack": ermers_audit(config, n, k1, const.k2, sets),
        "vdc": [
            {"arc": list(c.arc), "integral": abs(c.integral), "bound": c.bound, "passed": c.passed}
            for c in arcs
        ],
        "vdc_total": float(sum(abs(c.integral) for c in arcs)),
        "vdc_total_bound": 4.0 * config.N / ((k1 - 1.0) * n),
        "c": const.c,
    }
