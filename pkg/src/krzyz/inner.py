"""The Blaschke product h with f = exp(t (h - 1)/(h + 1)), symmetry detection,
and the structural conditions an extremal configuration must satisfy.

With q(z) = prod (1 - alpha_j z) the function q log f is the polynomial

    r(z) = -sum_k lam_k (1 + alpha_k z) prod_{j != k} (1 - alpha_j z),

and h = (t q + r)/(t q - r).  The numerator has degree N with leading
coefficient 2 t (-1)^N prod alpha_j; the denominator has degree <= N - 1 and
constant term 2 t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import TWO_PI, AtomicConfig, PowerSeries, f_series, f_value, series_exp
from .polyalg import BoundaryRootError, ComplexPoly, roots
from .variational import series_order_for

ANGLE_TOL = 1e-9
WEIGHT_TOL = 1e-9
ZERO_ROOT_TOL = 1e-6


class BlaschkeError(RuntimeError):
    """Numerically extracted h is not a Blaschke product of the expected degree."""


def series_div(num: PowerSeries, den: PowerSeries) -> PowerSeries:
    """num / den truncated at the shorter order; den(0) must be nonzero."""
    M = min(num.order, den.order)
    a, b = num.coeffs[: M + 1], den.coeffs[: M + 1]
    if b[0] == 0:
        raise ZeroDivisionError("series division by a series vanishing at 0")
    out = np.empty(M + 1, dtype=complex)
    for j in range(M + 1):
        out[j] = (a[j] - np.dot(b[1 : j + 1], out[j - 1 :: -1][:j])) / b[0]
    return PowerSeries(out)


def _poly_series(p: ComplexPoly, order: int) -> PowerSeries:
    c = np.zeros(order + 1, dtype=complex)
    k = min(order + 1, len(p.coeffs))
    c[:k] = p.coeffs[:k]
    return PowerSeries(c)


@dataclass(frozen=True)
class BlaschkeProduct:
    """xi prod (z - z_j)/(1 - conj(z_j) z)."""

    unimodular: complex
    zeros: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "zeros", np.asarray(self.zeros, dtype=complex).ravel())

    @property
    def degree(self) -> int:
        return len(self.zeros)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.unimodular, dtype=complex)
        for w in self.zeros:
            out = out * (z - w) / (1.0 - np.conj(w) * z)
        return out

    def numerator(self) -> ComplexPoly:
        c = np.poly(self.zeros)[::-1] if self.degree else np.array([1.0 + 0j])
        return ComplexPoly(self.unimodular * c)

    def denominator(self) -> ComplexPoly:
        if not self.degree:
            return ComplexPoly([1.0])
        c = np.array([1.0 + 0j])
        for w in self.zeros:
            c = np.convolve(c, [1.0, -np.conj(w)])
        return ComplexPoly(c)

    def series(self, order: int) -> PowerSeries:
        return series_div(_poly_series(self.numerator(), order), _poly_series(self.denominator(), order))

    def circle_deviation(self, samples: int = 512) -> float:
        th = TWO_PI * np.arange(samples) / samples
        return float(np.max(np.abs(np.abs(self(np.exp(1j * th))) - 1.0)))

    def winding_degree(self) -> int:
        """Degree read off as the winding number of B on the unit circle.

        arg B turns by ~2 pi over an arc of width ~(1 - |w|) near each zero w, which
        a uniform grid aliases when w hugs the circle.  The grid is therefore
        refined geometrically around each zero's angle.
        """
        th = [TWO_PI * np.arange(512) / 512]
        for w in self.zeros:
            gap = max(1.0 - abs(w), 1e-15)
            if gap > 0.25:
                continue
            d = gap * np.logspace(-3, math.log10(math.pi / gap), 600)
            th.append(np.angle(w) + np.concatenate([-d, [0.0], d]))
        th = np.unique(np.mod(np.concatenate(th), TWO_PI))
        th = np.append(th, th[0] + TWO_PI)
        vals = self(np.exp(1j * th))
        steps = np.angle(vals[1:] / vals[:-1])
        if np.max(np.abs(steps)) > math.pi / 2:
            raise BoundaryRootError("phase steps too large; a zero is too close to the circle")
        return int(round(np.sum(steps) / TWO_PI))

    def to_dict(self) -> dict:
        return {
            "unimodular": [float(self.unimodular.real), float(self.unimodular.imag)],
            "zeros": [[float(w.real), float(w.imag)] for w in self.zeros],
        }


def compose(outer: BlaschkeProduct, inner: BlaschkeProduct, probe: complex = 0.3 + 0.1j) -> BlaschkeProduct:
    """outer(inner(z)) as an explicit Blaschke product.

    Zeros solve inner(z) = a for each zero a of outer, i.e. the roots of
    xi N(z) - a D(z) where inner = xi N / D.
    """
    N, D = inner.numerator(), inner.denominator()
    zs = []
    for a in outer.zeros:
        zs.extend(roots(N - ComplexPoly(a * D.coeffs)))
    zs = np.asarray(zs, dtype=complex)
    partial = BlaschkeProduct(1.0, zs)
    xi = outer(inner(probe)) / partial(probe)
    return BlaschkeProduct(complex(xi / abs(xi)), zs)


def _q_and_r(config: AtomicConfig) -> tuple[ComplexPoly, ComplexPoly]:
    al, lam = config.alphas, config.lambdas
    q = np.array([1.0 + 0j])
    for a in al:
        q = np.convolve(q, [1.0, -a])
    r = np.zeros(config.N + 1, dtype=complex)
    for k, (ak, lk) in enumerate(zip(al, lam)):
        term = np.array([1.0, ak], dtype=complex)
        for j, aj in enumerate(al):
            if j != k:
                term = np.convolve(term, [1.0, -aj])
        r -= lk * term
    return ComplexPoly(q), ComplexPoly(r)


@dataclass(frozen=True)
class HData:
    blaschke: BlaschkeProduct
    num: ComplexPoly  # t q + r
    den: ComplexPoly  # t q - r
    t: float
    circle_error: float
    denominator_error: float  # den/(2t) against prod (1 - conj(z_j) z)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.num(z) / self.den(z)

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        n, d = self.num(z), self.den(z)
        return (self.num.deriv()(z) * d - n * self.den.deriv()(z)) / d**2


def blaschke_h(config: AtomicConfig, tol: float = 1e-8) -> HData:
    """Extract h = (t q + r)/(t q - r) and its zeros; raises BlaschkeError on inconsistency."""
    t = config.total_mass
    q, r = _q_and_r(config)
    tq = ComplexPoly(t * q.coeffs)
    num, den = tq + r, tq - r
    N = config.N
    lead = num.coeffs[N]
    xi = lead / (2.0 * t)
    zeros = roots(num)
    if len(zeros) != N:
        raise BlaschkeError(f"numerator has degree {len(zeros)}, expected {N}")
    if np.any(np.abs(zeros) >= 1.0):
        raise BlaschkeError(f"zero outside the open disk: max |z| = {np.max(np.abs(zeros)):.3e}")
    B = BlaschkeProduct(complex(xi / abs(xi)), zeros)
    dev = B.circle_deviation()
    dB = B.denominator().coeffs
    dd = np.zeros(max(len(dB), len(den.coeffs)), dtype=complex)
    dd[: len(den.coeffs)] += den.coeffs / (2.0 * t)
    dd[: len(dB)] -= dB
    den_err = float(np.max(np.abs(dd)))
    if dev > tol:
        raise BlaschkeError(f"|h| deviates from 1 on the circle by {dev:.3e}")
    return HData(B, num, den, t, dev, den_err)


def h_reconstruction_error(config: AtomicConfig, order: int | None = None, h: HData | None = None) -> float:
    """sup_j |T_j exp(t (h - 1)/(h + 1)) - a_j| for j <= order (default 2n), h from its zeros."""
    order = 2 * config.n if order is None else order
    h = blaschke_h(config) if h is None else h
    hs = h.blaschke.series(order)
    one = PowerSeries(np.r_[1.0, np.zeros(order)])
    ratio = series_div(PowerSeries(hs.coeffs - one.coeffs), PowerSeries(hs.coeffs + one.coeffs))
    rebuilt = series_exp(PowerSeries(h.t * ratio.coeffs))
    return float(np.max(np.abs(rebuilt.coeffs - f_series(config, order).coeffs)))


def check_fprime_relation(config: AtomicConfig, z, h: HData | None = None):
    """f'(z) - 2 t f(z) h'(z) / (h(z) + 1)^2, with f' summed from the series."""
    h = blaschke_h(config) if h is None else h
    z = np.asarray(z, dtype=complex)
    hz = h(z)
    if np.any(np.abs(hz + 1.0) < 1e-12):
        raise ZeroDivisionError("h(z) = -1: the relation has a pole here")
    rad = float(np.max(np.abs(z))) if z.size else 0.0
    if rad >= 1.0:
        raise ValueError("points must lie in the open unit disk")
    M = series_order_for(rad, scale=1.0)
    fprime = f_series(config, M).deriv()(z)
    return fprime - 2.0 * h.t * f_value(config, z) * h.deriv(z) / (hz + 1.0) ** 2


# --------------------------------------------------------------------------
# symmetry


def _circ_diff(a, b):
    return np.abs(np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b)))))


def _same_multiset(th1, lm1, th2, lm2) -> bool:
    if len(th1) != len(th2):
        return False
    o1, o2 = np.argsort(np.mod(th1, TWO_PI)), np.argsort(np.mod(th2, TWO_PI))
    a1, w1 = np.mod(th1, TWO_PI)[o1], lm1[o1]
    a2, w2 = np.mod(th2, TWO_PI)[o2], lm2[o2]
    # allow the sorted lists to be cyclically offset when an angle sits near 0 = 2 pi
    for s in range(len(a1)):
        b2, v2 = np.roll(a2, s), np.roll(w2, s)
        if np.all(_circ_diff(a1, b2) < ANGLE_TOL) and np.all(np.abs(w1 - v2) < WEIGHT_TOL):
            return True
    return False


def is_rotation_invariant(config: AtomicConfig, tau: float) -> bool:
    return _same_multiset(config.thetas, config.lambdas, config.thetas + tau, config.lambdas)


def rotation_invariants(config: AtomicConfig) -> list[float]:
    """All tau in [0, 2 pi) with the atom multiset invariant under theta -> theta + tau.

    The matching unimodular factors are exp(i tau); tau = 0 is always present.
    """
    th, lm = config.thetas, config.lambdas
    out = [0.0]
    for j in range(1, config.N):
        if abs(lm[j] - lm[0]) >= WEIGHT_TOL:
            continue
        tau = float((th[j] - th[0]) % TWO_PI)
        if is_rotation_invariant(config, tau):
            out.append(tau)
    return sorted(out)


def rotation_orbit_count(config: AtomicConfig) -> int:
    """Distinct configurations among the rotations by 2 pi j / n, j = 1..n."""
    reps: list[np.ndarray] = []
    for j in range(1, config.n + 1):
        th = config.thetas + TWO_PI * j / config.n
        if not any(_same_multiset(th, config.lambdas, r, config.lambdas) for r in reps):
            reps.append(th)
    return len(reps)


def gcd_certificate(config: AtomicConfig) -> tuple[int, bool]:
    """(gcd(N, n), gcd > 1) when a nontrivial rotation fixes f; (1, True) otherwise."""
    if len(rotation_invariants(config)) > 1:
        g = math.gcd(config.N, config.n)
        return g, g > 1
    return 1, True


@dataclass(frozen=True)
class MobiusMap:
    """psi(z) = psi_{-a}(xi psi_a(z)), psi_a(z) = (z - a)/(1 - conj(a) z)."""

    a: complex = 0.0
    xi: complex = 1.0

    def __post_init__(self):
        if abs(self.a) >= 1.0:
            raise ValueError("fixed point must lie in the open disk")
        if abs(abs(self.xi) - 1.0) > 1e-12:
            raise ValueError("rotation factor must be unimodular")

    @classmethod
    def rotation(cls, tau: float) -> "MobiusMap":
        return cls(0.0, complex(np.exp(1j * tau)))

    def matrix(self) -> np.ndarray:
        a, xi = complex(self.a), complex(self.xi)
        inner = np.array([[xi, -xi * a], [-np.conj(a), 1.0]])
        outer = np.array([[1.0, a], [np.conj(a), 1.0]])
        return outer @ inner

    def __call__(self, z):
        (A, B), (C, D) = self.matrix()
        z = np.asarray(z, dtype=complex)
        return (A * z + B) / (C * z + D)


def _linear_fraction_series(p0, p1, q0, q1, order: int) -> np.ndarray:
    ratio = -q1 / q0
    geo = ratio ** np.arange(order + 1)
    out = p0 / q0 * geo
    out[1:] += p1 / q0 * geo[:-1]
    return out


def composed_series(config: AtomicConfig, psi: MobiusMap, order: int) -> PowerSeries:
    """Taylor coefficients of f o psi."""
    (A, B), (C, D) = psi.matrix()
    g = np.zeros(order + 1, dtype=complex)
    for al, lam in zip(config.alphas, config.lambdas):
        # (1 + al psi)/(1 - al psi) = ((C + al A) z + D + al B) / ((C - al A) z + D - al B)
        g -= lam * _linear_fraction_series(D + al * B, C + al * A, D - al * B, C - al * A, order)
    return series_exp(PowerSeries(g))


def mobius_invariance_error(config: AtomicConfig, psi: MobiusMap, order: int | None = None) -> float:
    order = 2 * config.n if order is None else order
    return float(np.max(np.abs(composed_series(config, psi, order).coeffs - f_series(config, order).coeffs)))


def mobius_invariance_check(config: AtomicConfig, psi: MobiusMap, order: int | None = None,
                            tol: float = 1e-8) -> bool:
    order = 2 * config.n if order is None else order
    if order < 2 * config.n:
        raise ValueError("order must be at least 2n")
    return mobius_invariance_error(config, psi, order) <= tol


# --------------------------------------------------------------------------
# structural conditions on extremals


def _nonzero_roots_in_disk(p: ComplexPoly, inner_tol: float = ZERO_ROOT_TOL, edge: float = 1e-9) -> np.ndarray:
    if p.degree <= 0:
        return np.array([], dtype=complex)
    w = roots(p)
    m = np.abs(w)
    return w[(m > inner_tol) & (m < 1.0 - edge)]


def _condition_1(config: AtomicConfig) -> bool:
    hi = 4.0 * math.pi / config.n
    for tau in rotation_invariants(config):
        for lift in (tau, tau + TWO_PI):
            if 0.0 < lift < hi:
                return True
    return False


def _condition_2(config: AtomicConfig) -> bool:
    # log f(z) = log f(0) exactly where r + t q vanishes
    t = config.total_mass
    q, r = _q_and_r(config)
    return len(_nonzero_roots_in_disk(ComplexPoly(t * q.coeffs) + r)) == 0


def _condition_3(config: AtomicConfig) -> bool:
    # f' = g' f and g = r / q, so zeros of f' are zeros of r' q - r q'
    q, r = _q_and_r(config)
    w = r.deriv() * q - r * q.deriv()
    if np.max(np.abs(w.coeffs)) == 0.0:
        return False
    return len(_nonzero_roots_in_disk(w)) == 0


def _vanishing_coefficients(config: AtomicConfig, upto: int, tol: float) -> bool:
    if upto < 1:
        return True
    a = f_series(config, upto).coeffs
    return bool(np.all(np.abs(a[1 : upto + 1]) < tol))


def krzyz_condition_check(config: AtomicConfig, which: int, tol: float = 1e-6) -> bool:
    """Structural conditions (1)-(5) every extremal for the n-th coefficient satisfies.

    1: f(e^{i tau} z) = f(z) for some tau in (0, 4 pi / n)
    2: log f(z) = log f(0) only at z = 0
    3: f' has no zeros in D minus {0}
    4: a_j = 0 for 1 <= j <= N - 1
    5: a_j = 0 for 1 <= j <= ceil((n - 2) / 3)
    """
    if which == 1:
        return _condition_1(config)
    if which == 2:
        return _condition_2(config)
    if which == 3:
        return _condition_3(config)
    if which == 4:
        return _vanishing_coefficients(config, config.N - 1, tol)
    if which == 5:
        return _vanishing_coefficients(config, -(-(config.n - 2) // 3), tol)
    raise ValueError(f"condition must be one of 1..5, got {which}")


@dataclass
class InvariantsReport:
    rotations: list[float]
    orbit_count: int
    gcd: int
    gcd_consistent: bool
    conditions: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rotations": self.rotations,
            "orbit_count": self.orbit_count,
            "gcd": self.gcd,
            "gcd_consistent": self.gcd_consistent,
            "conditions": {str(k): v for k, v in self.conditions.items()},
        }


def invariants_report(config: AtomicConfig, tol: float = 1e-6) -> InvariantsReport:
    g, ok = gcd_certificate(config)
    return InvariantsReport(
        rotations=rotation_invariants(config),
        orbit_count=rotation_orbit_count(config),
        gcd=g,
        gcd_consistent=ok,
        conditions={k: krzyz_condition_check(config, k, tol) for k in range(1, 6)},
    )
