"""Atomic configurations and the truncated power-series engine.

An atomic singular inner function is

    f(z) = exp(-sum_k lam_k (1 + alpha_k z) / (1 - alpha_k z)),  alpha_k = exp(-i theta_k)

Everything downstream works from the Taylor coefficients a_j of f, b_j of
g = log f, and T_j(f g).  The recurrence j a_j = sum_k k b_k a_{j-k} is the
single source of truth; contour quadrature is kept only as a cross-check.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
MERGE_THRESHOLD = 1e-9


class ConfigError(ValueError):
    """Invalid atomic configuration; ``field`` names the offending input."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message if not field else f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class AtomicConfig:
    """Target index ``n`` plus atoms (theta_k, lam_k), sorted by angle.

    Build instances with :func:`make_config`; the constructor itself does no
    validation so internal code can pass pre-validated arrays cheaply.
    """

    n: int
    thetas: np.ndarray
    lambdas: np.ndarray

    @property
    def N(self) -> int:
        return len(self.thetas)

    @property
    def alphas(self) -> np.ndarray:
        return np.exp(-1j * self.thetas)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.lambdas))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return [(float(a), float(w)) for a, w in zip(self.thetas, self.lambdas)]

    def rotated(self, tau: float) -> "AtomicConfig":
        """Shift every angle by ``tau``; a_j picks up the factor exp(-i j tau)."""
        return make_config([(a + tau, w) for a, w in self.atoms], self.n)

    def with_n(self, n: int) -> "AtomicConfig":
        return make_config(self.atoms, n)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "atoms": [{"theta": a, "lambda": w} for a, w in self.atoms],
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AtomicConfig):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.thetas, other.thetas)
            and np.array_equal(self.lambdas, other.lambdas)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.thetas.tobytes(), self.lambdas.tobytes()))


def make_config(atoms: Iterable[Sequence[float]], n: int) -> AtomicConfig:
    """Validate atoms, reduce angles mod 2*pi, sort, and merge near-duplicates."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ConfigError("target index must be an integer", "n")
    if n < 1:
        raise ConfigError("target index must be >= 1", "n")
    atoms = list(atoms)
    if not atoms:
        raise ConfigError("empty atom list", "atoms")
    thetas, lams = [], []
    for i, atom in enumerate(atoms):
        try:
            theta, lam = float(atom[0]), float(atom[1])
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"malformed atom {atom!r}", f"atoms[{i}]") from exc
        if not math.isfinite(theta):
            raise ConfigError("non-finite angle", f"atoms[{i}].theta")
        if not math.isfinite(lam):
            raise ConfigError("non-finite weight", f"atoms[{i}].lambda")
        if lam <= 0.0:
            raise ConfigError("non-positive weight", f"atoms[{i}].lambda")
        thetas.append(theta % TWO_PI)
        lams.append(lam)

    order = np.argsort(thetas, kind="stable")
    th = np.asarray(thetas)[order]
    lm = np.asarray(lams)[order]

    merged_t: list[float] = [th[0]]
    merged_l: list[float] = [lm[0]]
    for a, w in zip(th[1:], lm[1:]):
        if a - merged_t[-1] < MERGE_THRESHOLD:
            merged_l[-1] += w
        else:
            merged_t.append(a)
            merged_l.append(w)
    # wrap-around: last atom just below 2*pi collides with the first one
    if len(merged_t) > 1 and merged_t[0] + TWO_PI - merged_t[-1] < MERGE_THRESHOLD:
        merged_l[0] += merged_l.pop()
        merged_t.pop()
    return AtomicConfig(int(n), np.asarray(merged_t, float), np.asarray(merged_l, float))


def reference_config(n: int) -> AtomicConfig:
    """The conjectured extremal f_n = exp((z^n - 1)/(z^n + 1)).

    n atoms of weight 1/n with alpha_k the n-th roots of -1, i.e.
    theta_k = (2k - 1) pi / n.
    """
    if n < 1:
        raise ConfigError("target index must be >= 1", "n")
    return make_config([((2 * k - 1) * math.pi / n, 1.0 / n) for k in range(1, n + 1)], n)


def config_from_dict(data: dict) -> AtomicConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", "")
    if "n" not in data:
        raise ConfigError("missing field", "n")
    if "atoms" not in data or not isinstance(data["atoms"], list):
        raise ConfigError("missing or non-list field", "atoms")
    atoms = []
    for i, atom in enumerate(data["atoms"]):
        if not isinstance(atom, dict):
            raise ConfigError("atom must be an object", f"atoms[{i}]")
        for key in ("theta", "lambda"):
            if key not in atom:
                raise ConfigError("missing field", f"atoms[{i}].{key}")
            if isinstance(atom[key], bool) or not isinstance(atom[key], (int, float)):
                raise ConfigError("must be a number", f"atoms[{i}].{key}")
        atoms.append((atom["theta"], atom["lambda"]))
    return make_config(atoms, data["n"])


def load_config(path) -> AtomicConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def dump_config(config: AtomicConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class PowerSeries:
    """Coefficients c_0..c_M of a series truncated at order M."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, j):
        return self.coeffs[j]

    def __call__(self, z):
        """Evaluate the truncated polynomial (Horner)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            out = out * z + c
        return out

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        m = min(self.order, other.order)
        return PowerSeries(np.convolve(self.coeffs[: m + 1], other.coeffs[: m + 1])[: m + 1])

    def truncate(self, order: int) -> "PowerSeries":
        return PowerSeries(self.coeffs[: order + 1])

    def deriv(self) -> "PowerSeries":
        if self.order == 0:
            return PowerSeries([0.0])
        return PowerSeries(self.coeffs[1:] * np.arange(1, self.order + 1))

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "re", "im"])
        for j, c in enumerate(self.coeffs):
            w.writerow([j, repr(float(c.real)), repr(float(c.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PowerSeries":
        rows = list(csv.DictReader(io.StringIO(text)))
        coeffs = np.zeros(len(rows), dtype=complex)
        for row in rows:
            coeffs[int(row["j"])] = complex(float(row["re"]), float(row["im"]))
        return cls(coeffs)


def total_mass(config: AtomicConfig) -> float:
    """t = sum of weights, so that f(0) = exp(-t)."""
    return config.total_mass


def g_series(config: AtomicConfig, order: int) -> PowerSeries:
    """Coefficients of g = log f: b_0 = -t, b_j = -2 sum lam_k alpha_k^j."""
    if order < 0:
        raise ValueError("order must be >= 0")
    b = np.empty(order + 1, dtype=complex)
    b[0] = -config.total_mass
    if order:
        j = np.arange(1, order + 1)
        b[1:] = -2.0 * (np.exp(-1j * np.outer(j, config.thetas)) @ config.lambdas)
    return PowerSeries(b)


def series_exp(s: PowerSeries) -> PowerSeries:
    """exp of a truncated series by j a_j = sum_{k=1}^j k b_k a_{j-k}."""
    b = s.coeffs
    M = len(b) - 1
    a = np.empty(M + 1, dtype=complex)
    a[0] = np.exp(b[0])
    kb = np.arange(M + 1) * b
    for j in range(1, M + 1):
        a[j] = np.dot(kb[1 : j + 1], a[j - 1 :: -1]) / j
    return PowerSeries(a)


def f_series(config: AtomicConfig, order: int) -> PowerSeries:
    return series_exp(g_series(config, order))


def fg_series(config: AtomicConfig, order: int) -> PowerSeries:
    """Taylor coefficients T_j(f g), j <= order."""
    g = g_series(config, order)
    return series_exp(g) * g


def m_n(config: AtomicConfig) -> float:
    """The objective Re a_n."""
    return float(f_series(config, config.n)[config.n].real)


def f_value(config: AtomicConfig, z) -> np.ndarray:
    """Closed-form evaluation of f inside the disk."""
    z = np.asarray(z, dtype=complex)
    az = np.multiply.outer(z, config.alphas)
    return np.exp(-np.sum(config.lambdas * (1 + az) / (1 - az), axis=-1))


def default_samples(order: int) -> int:
    s = max(256, 16 * order)
    return 1 << (s - 1).bit_length()


def coefficient_via_contour(
    config: AtomicConfig, j: int, r: float = 0.5, samples: int | None = None
) -> complex:
    """Trapezoid rule for (1/2 pi) int f(r e^{it}) e^{-ijt} dt, scaled by r^{-j}."""
    if not 0.0 < r < 1.0:
        raise ValueError(f"radius must lie in (0, 1), got {r}")
    if samples is None:
        samples = default_samples(j)
    if samples < max(64, 8 * j):
        raise ValueError(f"need at least max(64, 8j) = {max(64, 8 * j)} samples")
    t = TWO_PI * np.arange(samples) / samples
    vals = f_value(config, r * np.exp(1j * t))
    return complex(np.mean(vals * np.exp(-1j * j * t)) / r**j)
