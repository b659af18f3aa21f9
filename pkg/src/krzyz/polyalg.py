"""Complex polynomial algebra: P and Q, roots, winding numbers, Fejer-Riesz.

Polynomials are stored with ascending coefficients c_0..c_d.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import TWO_PI, AtomicConfig, f_series, fg_series

ZERO_TOL = 1e-13


class BoundaryRootError(ValueError):
    """A polynomial (nearly) vanishes on the sampled circle."""


class FactorizationError(ValueError):
    pass


@dataclass(frozen=True)
class ComplexPoly:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        scale = np.max(np.abs(self.coeffs)) if self.coeffs.size else 0.0
        if scale == 0.0:
            return 0
        nz = np.nonzero(np.abs(self.coeffs) > ZERO_TOL * scale)[0]
        return int(nz[-1])

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            out = out * z + c
        return out

    def deriv(self) -> "ComplexPoly":
        if len(self.coeffs) <= 1:
            return ComplexPoly([0.0])
        return ComplexPoly(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def __add__(self, other: "ComplexPoly") -> "ComplexPoly":
        m = max(len(self.coeffs), len(other.coeffs))
        out = np.zeros(m, dtype=complex)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return ComplexPoly(out)

    def __sub__(self, other: "ComplexPoly") -> "ComplexPoly":
        return self + ComplexPoly(-other.coeffs)

    def __mul__(self, other):
        if isinstance(other, ComplexPoly):
            return ComplexPoly(np.convolve(self.coeffs, other.coeffs))
        return ComplexPoly(self.coeffs * other)

    __rmul__ = __mul__

    def trimmed(self) -> "ComplexPoly":
        return ComplexPoly(self.coeffs[: self.degree + 1])

    def roots(self) -> np.ndarray:
        return roots(self)

    def to_dict(self) -> dict:
        return {"coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ComplexPoly":
        return cls([complex(re, im) for re, im in data["coeffs"]])


@dataclass(frozen=True)
class TrigPolyReal:
    """Real trigonometric polynomial sum_{|k|<=d} c_k e^{ik theta}, c_{-k} = conj(c_k).

    Only c_0..c_d are stored; c_0 must be real.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        if abs(c[0].imag) > 1e-12 * max(1.0, abs(c[0])):
            raise ValueError("constant coefficient of a real trig polynomial must be real")
        c[0] = c[0].real
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def full(self) -> np.ndarray:
        """c_{-d}..c_d."""
        return np.concatenate([np.conj(self.coeffs[:0:-1]), self.coeffs])

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        k = np.arange(1, len(self.coeffs))
        out = np.full(theta.shape, self.coeffs[0].real)
        if k.size:
            out = out + 2.0 * np.real(np.exp(1j * np.multiply.outer(theta, k)) @ self.coeffs[1:])
        return out

    def derivative(self, theta, order: int = 1):
        """d^order/dtheta^order of T."""
        theta = np.asarray(theta, dtype=float)
        k = np.arange(1, len(self.coeffs))
        out = np.zeros(theta.shape)
        if k.size:
            w = (1j * k) ** order * self.coeffs[1:]
            out = out + 2.0 * np.real(np.exp(1j * np.multiply.outer(theta, k)) @ w)
        return out

    @classmethod
    def from_abs2(cls, p: ComplexPoly) -> "TrigPolyReal":
        """|p(e^{i theta})|^2."""
        c = p.coeffs
        d = len(c) - 1
        return cls([np.sum(c[k:] * np.conj(c[: d + 1 - k])) for k in range(d + 1)])

    @classmethod
    def real_part_on_circle(cls, P: ComplexPoly) -> "TrigPolyReal":
        """theta -> Re P(e^{i theta})."""
        c = P.coeffs.copy()
        out = c / 2.0
        out[0] = c[0].real
        return cls(out)


def build_P(config: AtomicConfig) -> ComplexPoly:
    """P(z) = a_n + 2 sum_{j=1}^n a_{n-j} z^j."""
    n = config.n
    a = f_series(config, n).coeffs
    c = np.empty(n + 1, dtype=complex)
    c[0] = a[n]
    c[1:] = 2.0 * a[n - 1 :: -1]
    return ComplexPoly(c)


def build_Q(config: AtomicConfig) -> ComplexPoly:
    """Q(z) = T_n(fg) + 2 sum_{j=1}^n T_{n-j}(fg) z^j."""
    n = config.n
    T = fg_series(config, n).coeffs
    c = np.empty(n + 1, dtype=complex)
    c[0] = T[n]
    c[1:] = 2.0 * T[n - 1 :: -1]
    return ComplexPoly(c)


# --------------------------------------------------------------------------
# roots


def _aberth(c: np.ndarray, maxiter: int, tol: float) -> tuple[np.ndarray, bool]:
    """Aberth-Ehrlich simultaneous iteration on a polynomial with c[-1] != 0."""
    d = len(c) - 1
    a = c / c[-1]
    # geometric-mean radius, angles offset to avoid symmetric stagnation
    radius = abs(a[0]) ** (1.0 / d)
    z = radius * np.exp(1j * (TWO_PI * np.arange(d) / d + 0.4))
    dc = c[1:] * np.arange(1, d + 1)
    for _ in range(maxiter):
        pv = np.polynomial.polynomial.polyval(z, c)
        dv = np.polynomial.polynomial.polyval(z, dc)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pv / dv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            corr = ratio / (1.0 - ratio * inv.sum(axis=1))
        if not np.all(np.isfinite(corr)):
            return z, False
        z = z - corr
        if np.all(np.abs(corr) <= tol * np.maximum(1.0, np.abs(z))):
            return z, True
    return z, False


def roots(p: ComplexPoly, maxiter: int = 200, tol: float = 1e-13) -> np.ndarray:
    """All roots with multiplicity.

    Leading and trailing negligible coefficients (below 1e-13 of the largest)
    are stripped first; the trailing ones become exact roots at zero.  Aberth
    iteration runs up to ``maxiter`` sweeps and falls back to companion-matrix
    eigenvalues if it stagnates or leaves a worse residual.
    """
    c = np.asarray(p.coeffs, dtype=complex)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        raise ValueError("zero polynomial has no well-defined roots")
    c = c[: p.degree + 1]
    small = np.abs(c) <= ZERO_TOL * scale
    nzero = 0
    while nzero < len(c) - 1 and small[nzero]:
        nzero += 1
    c = c[nzero:]
    d = len(c) - 1
    if d == 0:
        return np.zeros(nzero, dtype=complex)
    if d == 1:
        rest = np.array([-c[0] / c[1]])
    else:
        rest, ok = _aberth(c, maxiter, tol)
        res_a = np.max(np.abs(np.polynomial.polynomial.polyval(rest, c))) if ok else np.inf
        if not ok or res_a > 1e-8 * np.max(np.abs(c)):
            comp = np.roots(c[::-1])
            res_c = np.max(np.abs(np.polynomial.polynomial.polyval(comp, c)))
            if res_c <= res_a:
                rest = comp
    out = np.concatenate([np.zeros(nzero, dtype=complex), rest])
    return out[np.lexsort((out.imag, out.real))]


def count_roots_inside(p: ComplexPoly, radius: float = 1.0) -> int:
    if p.degree == 0:
        return 0
    return int(np.sum(np.abs(roots(p)) < radius))


def winding_number(p, samples: int = 256, max_samples: int = 1 << 18, radius: float = 1.0) -> int:
    """Winding of theta -> e^{i theta} p(r e^{i theta}) about 0.

    ``p`` is a ComplexPoly or any vectorised callable.  The sample count is
    doubled until the count is stable and no step exceeds pi/2.
    """
    prev = None
    s = samples
    while s <= max_samples:
        theta = TWO_PI * np.arange(s + 1) / s
        z = radius * np.exp(1j * theta)
        vals = np.exp(1j * theta) * np.asarray(p(z), dtype=complex)
        if np.min(np.abs(vals)) < 1e-10:
            raise BoundaryRootError("polynomial vanishes on the sampling circle; perturb the radius")
        steps = np.angle(vals[1:] / vals[:-1])
        w = int(round(np.sum(steps) / TWO_PI))
        if np.max(np.abs(steps)) < math.pi / 2 and w == prev:
            return w
        prev = w
        s *= 2
    raise BoundaryRootError("winding number did not stabilise; a root is too close to the circle")


# --------------------------------------------------------------------------
# Fejer-Riesz


@dataclass(frozen=True)
class Factorization:
    scale: float
    p: ComplexPoly  # monic-root form prod (z - w_j); T = scale^2 |p|^2
    roots: np.ndarray
    circle_roots: np.ndarray
    sup_error: float

    @property
    def poly(self) -> ComplexPoly:
        """The scaled factor c * p."""
        return ComplexPoly(self.scale * self.p.coeffs)

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "roots": [[float(w.real), float(w.imag)] for w in self.roots],
            "circle_roots": [[float(w.real), float(w.imag)] for w in self.circle_roots],
            "sup_error": self.sup_error,
        }


def _pair_circle_roots(w: np.ndarray) -> np.ndarray:
    """Pair up unit-circle roots by angle, returning one representative per pair."""
    if len(w) % 2:
        raise FactorizationError(
            f"odd number ({len(w)}) of boundary roots; T has an odd-multiplicity zero on the circle"
        )
    if not len(w):
        return w
    ang = np.sort(np.mod(np.angle(w), TWO_PI))
    best = None
    for shift in (0, 1):
        a = np.roll(ang, -shift)
        first, second = a[0::2], a[1::2]
        gap = np.abs(np.angle(np.exp(1j * (second - first))))
        cost = np.max(gap)
        if best is None or cost < best[0]:
            best = (cost, first, second)
    cost, first, second = best
    if cost > 1e-3:
        raise FactorizationError("boundary roots do not pair up; odd-multiplicity zero on the circle")
    mid = first + 0.5 * np.angle(np.exp(1j * (second - first)))
    return np.exp(1j * mid)


def _polish_double_roots(T: TrigPolyReal, w: np.ndarray, steps: int = 8) -> np.ndarray:
    """Newton on T' at each double zero; eigenvalue roots only resolve these to ~sqrt(eps)."""
    if not len(w):
        return w
    th = np.angle(w)
    for _ in range(steps):
        d2 = T.derivative(th, 2)
        ok = np.abs(d2) > 0
        step = np.where(ok, T.derivative(th, 1) / np.where(ok, d2, 1.0), 0.0)
        step = np.clip(step, -1e-4, 1e-4)
        th = th - step
    return np.exp(1j * th)


def fejer_riesz(
    T: TrigPolyReal, circle_tol: float = 1e-6, neg_tol: float = 1e-9
) -> Factorization:
    """Factor T(theta) = c^2 |p(e^{i theta})|^2 with p zero-free in the open disk."""
    grid = TWO_PI * np.arange(4096) / 4096
    vals = T(grid)
    if np.min(vals) < -neg_tol:
        raise FactorizationError(f"trigonometric polynomial is negative (min {np.min(vals):.3e})")
    c = T.coeffs
    scale_c = np.max(np.abs(c))
    if scale_c == 0.0:
        raise FactorizationError("zero trigonometric polynomial")
    d = int(np.nonzero(np.abs(c) > ZERO_TOL * scale_c)[0][-1])
    if d == 0:
        p = ComplexPoly([1.0])
        return Factorization(math.sqrt(c[0].real), p, np.array([], complex), np.array([], complex), 0.0)
    full = np.concatenate([np.conj(c[d:0:-1]), c[: d + 1]])  # z^d T(z), ascending
    w = roots(ComplexPoly(full))
    mod = np.abs(w)
    on_circle = np.abs(mod - 1.0) < circle_tol
    circle = _polish_double_roots(T, _pair_circle_roots(w[on_circle] / mod[on_circle]))
    off = w[~on_circle]
    off = off[np.argsort(np.abs(off))]
    outer = off[len(off) // 2 :]
    if np.any(np.abs(outer) <= 1.0):
        raise FactorizationError("root reflection structure broken; T is not non-negative")
    zs = np.concatenate([outer, circle])
    pc = np.poly(zs)[::-1] if len(zs) else np.array([1.0 + 0j])
    pm = ComplexPoly(pc)
    # c^2 conj(p_0) p_d = c_d with p_d = 1
    scale = math.sqrt(abs(c[d]) / abs(pc[0]))
    check = np.linspace(0.0, TWO_PI, 2048, endpoint=False)
    err = float(np.max(np.abs(scale**2 * np.abs(pm(np.exp(1j * check))) ** 2 - T(check))))
    return Factorization(scale, pm, zs, circle, err)


def annulus_radius(config: AtomicConfig, tol: float = 1e-8) -> tuple[float, bool]:
    """Outer radius r of the annulus 1 <= |z| <= r claimed to hold the zeros of P.

    r = (1/a_0) sqrt(sum_{j<n} |a_j|^2 + |a_n|^2/4).  The flag reports whether
    every root of P satisfies 1 - tol <= |z| <= r + tol.
    """
    n = config.n
    a = f_series(config, n).coeffs
    r = math.sqrt(float(np.sum(np.abs(a[:n]) ** 2) + abs(a[n]) ** 2 / 4.0)) / a[0].real
    mods = np.abs(roots(build_P(config)))
    contained = bool(np.all(mods >= 1.0 - tol) and np.all(mods <= r + tol))
    return r, contained
