"""Maximize Re a_n over atom configurations.

Projected gradient ascent with Armijo backtracking, finished by Newton steps
on a finite-difference Hessian of the analytic gradient once the iterate is
close to a critical point.  Many independent random starts are merged by value.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .core import TWO_PI, AtomicConfig, f_series, make_config
from .variational import StationarityReport, first_order_conditions


@dataclass(frozen=True)
class OptimizerOptions:
    max_iter: int = 5000
    tol: float = 1e-8
    lambda_floor: float = 1e-8
    drop_after: int = 20
    armijo_c: float = 1e-4
    shrink: float = 0.5
    initial_step: float | None = None  # 0.1 / (1 + n) when None
    newton_switch: float = 1e-3
    newton_h: float = 1e-6
    t_window: tuple[float, float] = (0.8, 1.3)
    stall_window: int = 200
    record_history: bool = False
    threads: int | None = None  # falls back to KRZYZ_THREADS, then 1


@dataclass
class OptimizationResult:
    config: AtomicConfig
    value: float
    grad_norm: float
    stationarity: StationarityReport
    starts_used: int
    iterations: int
    converged: bool
    seed: int | None = None
    start_index: int = 0
    history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n": self.config.n,
            "value": self.value,
            "config": self.config.to_dict(),
            "grad_norm": self.grad_norm,
            "stationarity": self.stationarity.to_dict(),
            "starts": self.starts_used,
            "seed": self.seed,
            "iterations": self.iterations,
            "converged": self.converged,
        }


# --------------------------------------------------------------------------
# objective


def _value_and_grad(n: int, th: np.ndarray, lam: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    cfg = AtomicConfig(n, th, lam)
    a = f_series(cfg, n).coeffs
    al = np.exp(-1j * th)
    # P(z) = a_n + 2 sum_{j>=1} a_{n-j} z^j, P'(z) = 2 sum j a_{n-j} z^{j-1}
    j = np.arange(1, n + 1)
    pw = al[:, None] ** j[None, :]
    P = a[n] + 2.0 * pw @ a[n - j]
    zPp = 2.0 * pw @ (j * a[n - j])
    return float(a[n].real), -P.real, -lam * zPp.imag


def objective_and_gradient(config: AtomicConfig) -> tuple[float, np.ndarray, np.ndarray]:
    """(Re a_n, d/dlambda_k, d/dtheta_k) with d lambda_k = -Re P(alpha_k), d theta_k = -lambda_k Im(alpha_k P'(alpha_k))."""
    return _value_and_grad(config.n, config.thetas, config.lambdas)


class Gauge(NamedTuple):
    config: AtomicConfig
    tau: float
    defined: bool


def normalize_rotation(config: AtomicConfig) -> Gauge:
    """Rotate by the smallest tau >= 0 making a_n real and positive."""
    an = complex(f_series(config, config.n)[config.n])
    if abs(an) <= 1e-12:
        return Gauge(config, 0.0, False)
    tau = (math.atan2(an.imag, an.real) % TWO_PI) / config.n
    if tau == 0.0:
        return Gauge(config, 0.0, True)
    return Gauge(config.rotated(tau), tau, True)


# --------------------------------------------------------------------------
# single start


def _merge(th: np.ndarray, lam: np.ndarray, floor_count: np.ndarray):
    th = np.mod(th, TWO_PI)
    order = np.argsort(th, kind="stable")
    th, lam, floor_count = th[order], lam[order], floor_count[order]
    keep_t, keep_l, keep_c = [th[0]], [lam[0]], [floor_count[0]]
    for a, w, c in zip(th[1:], lam[1:], floor_count[1:]):
        if a - keep_t[-1] < 1e-9:
            keep_l[-1] += w
            keep_c[-1] = 0
        else:
            keep_t.append(a)
            keep_l.append(w)
            keep_c.append(c)
    if len(keep_t) > 1 and keep_t[0] + TWO_PI - keep_t[-1] < 1e-9:
        keep_l[0] += keep_l.pop()
        keep_t.pop()
        keep_c.pop()
    return np.array(keep_t), np.array(keep_l), np.array(keep_c, dtype=int)


def _project(lam: np.ndarray, floor: float, t_min: float) -> np.ndarray:
    lam = np.maximum(lam, floor)
    s = lam.sum()
    if t_min > 0.0 and s < t_min:
        lam = lam * (t_min / s)
    return lam


def _projected_grad(lam, gl, gt, floor, t_min):
    gl = np.where((lam <= floor * (1 + 1e-12)) & (gl < 0.0), 0.0, gl)
    if t_min > 0.0 and lam.sum() <= t_min * (1 + 1e-12):
        free = lam > floor * (1 + 1e-12)
        if np.any(free):
            mean = gl[free].mean()
            if mean < 0.0:
                # moving along -1 leaves the feasible set; keep the tangential part only
                gl = np.where(free, gl - mean, 0.0)
    return gl, gt


def _newton_step(n, th, lam, h):
    """Newton update for the joint (lambda, theta) critical point, or None if unusable."""
    x0 = np.concatenate([lam, th])
    m = len(lam)

    def grad(x):
        _, gl, gt = _value_and_grad(n, x[m:], x[:m])
        return np.concatenate([gl, gt])

    H = np.empty((2 * m, 2 * m))
    for i in range(2 * m):
        e = np.zeros(2 * m)
        e[i] = h
        H[:, i] = (grad(x0 + e) - grad(x0 - e)) / (2 * h)
    H = 0.5 * (H + H.T)
    mu, V = np.linalg.eigh(H)
    scale = max(1.0, float(np.max(np.abs(mu))))
    if mu[-1] > 1e-6 * scale:
        return None  # saddle: leave it to gradient ascent
    # flat directions (continuous families of critical points) are skipped
    use = mu < -1e-8 * scale
    if not np.any(use):
        return None
    d = -V[:, use] @ ((V[:, use].T @ grad(x0)) / mu[use])
    return x0[:m] + d[:m], x0[m:] + d[m:]


def _run_start(n, th, lam, opts: OptimizerOptions, t_min: float = 0.0):
    floor = opts.lambda_floor
    step = opts.initial_step if opts.initial_step is not None else 0.1 / (1 + n)
    lam = _project(np.asarray(lam, float), floor, t_min)
    th = np.asarray(th, float)
    pinned = np.zeros(len(th), dtype=int)
    th, lam, pinned = _merge(th, lam, pinned)
    history: list[float] = []
    converged = False
    it = 0
    v, gl, gt = _value_and_grad(n, th, lam)
    best_seen, last_gain = v, 0
    while it < opts.max_iter:
        it += 1
        if v > best_seen + 1e-15 * max(1.0, abs(best_seen)):
            best_seen, last_gain = v, it
        elif it - last_gain > opts.stall_window:
            break
        pl, pt = _projected_grad(lam, gl, gt, floor, t_min)
        gnorm = math.sqrt(float(pl @ pl + pt @ pt))
        if opts.record_history:
            history.append(v)
        if gnorm < opts.tol:
            converged = True
            break
        inactive = lam.sum() > t_min * (1 + 1e-9)
        if gnorm < opts.newton_switch and inactive and np.all(lam > floor * 10):
            trial = _newton_step(n, th, lam, opts.newton_h)
            if trial is not None:
                nl, nt = trial
                if np.all(nl > floor) and nl.sum() >= t_min:
                    nv, ngl, ngt = _value_and_grad(n, nt, nl)
                    if nv >= v - 1e-12 and math.hypot(np.linalg.norm(ngl), np.linalg.norm(ngt)) < gnorm:
                        th, lam, v, gl, gt = np.mod(nt, TWO_PI), nl, nv, ngl, ngt
                        continue
        # Armijo backtracking along the projected gradient
        s = step
        accepted = False
        while s > 1e-16:
            nl = _project(lam + s * pl, floor, t_min)
            nt = th + s * pt
            nv, ngl, ngt = _value_and_grad(n, nt, nl)
            gain = float(pl @ (nl - lam) + pt @ (nt - th))
            if nv >= v + opts.armijo_c * gain:
                accepted = True
                break
            s *= opts.shrink
        if not accepted:
            break
        step = min(2.0 * s, 10.0)
        th, lam, v, gl, gt = nt, nl, nv, ngl, ngt
        pinned = np.where(lam <= floor * (1 + 1e-12), pinned + 1, 0)
        drop = pinned >= opts.drop_after
        if np.any(drop) and len(lam) > 1:
            keep = ~drop
            if not np.any(keep):
                keep[np.argmax(lam)] = True
            th, lam, pinned = th[keep], _project(lam[keep], floor, t_min), pinned[keep]
            v, gl, gt = _value_and_grad(n, th, lam)
        m0 = len(th)
        th, lam, pinned = _merge(th, lam, pinned)
        if len(th) != m0:
            v, gl, gt = _value_and_grad(n, th, lam)
    return th, lam, it, converged, history


def _seed_start(n: int, N: int, rng: np.random.Generator, opts: OptimizerOptions):
    th = rng.uniform(0.0, TWO_PI, N)
    t = rng.uniform(*opts.t_window)
    lam = t * rng.dirichlet(np.ones(N))
    return th, lam


def _finish(n, th, lam, it, converged, history, opts, t_min, seed, index) -> OptimizationResult:
    cfg = make_config(list(zip(th, lam)), n)
    cfg = normalize_rotation(cfg).config
    v, gl, gt = objective_and_gradient(cfg)
    pl, pt = _projected_grad(cfg.lambdas, gl, gt, opts.lambda_floor, t_min)
    return OptimizationResult(
        config=cfg,
        value=v,
        grad_norm=math.sqrt(float(pl @ pl + pt @ pt)),
        stationarity=first_order_conditions(cfg),
        starts_used=1,
        iterations=it,
        converged=converged,
        seed=seed,
        start_index=index,
        history=history,
    )


def _job(args):
    n, th, lam, opts, t_min, seed, index = args
    th, lam, it, conv, hist = _run_start(n, th, lam, opts, t_min)
    return _finish(n, th, lam, it, conv, hist, opts, t_min, seed, index)


def _threads(opts: OptimizerOptions) -> int:
    if opts.threads is not None:
        return max(1, int(opts.threads))
    env = os.environ.get("KRZYZ_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _run_jobs(jobs, opts: OptimizerOptions) -> list[OptimizationResult]:
    workers = min(_threads(opts), len(jobs))
    if workers <= 1:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_job, jobs))


def _best(results: list[OptimizationResult], starts: int) -> OptimizationResult:
    # max by value, ties broken by the lower start index
    best = max(results, key=lambda r: (r.value, -r.start_index))
    return replace(best, starts_used=starts, iterations=sum(r.iterations for r in results))


def _starts(n, N, starts, seed, opts, initial=()):
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(starts)]
    out = [(n, np.asarray(th, float), np.asarray(lam, float)) for th, lam in initial]
    for rng in rngs[: max(0, starts - len(out))]:
        out.append((n, *_seed_start(n, N, rng, opts)))
    return out


def maximize(n: int, N: int, starts: int = 32, seed: int = 0,
             options: OptimizerOptions | None = None, initial=()) -> OptimizationResult:
    """Best local maximum of Re a_n over ``starts`` random N-atom seeds.

    ``initial`` optionally supplies (thetas, lambdas) seeds that replace the
    first random ones.
    """
    return constrained_maximize(n, N, 0.0, starts=starts, seed=seed, options=options, initial=initial)


def constrained_maximize(n: int, N: int, t_min: float, starts: int = 32, seed: int = 0,
                         options: OptimizerOptions | None = None, initial=()) -> OptimizationResult:
    """maximize() restricted to total mass >= t_min (projection by uniform weight scaling)."""
    if n < 1 or N < 1 or starts < 1:
        raise ValueError("need n >= 1, N >= 1, starts >= 1")
    if t_min < 0:
        raise ValueError("t_min must be >= 0")
    opts = options or OptimizerOptions()
    seeds = _starts(n, N, starts, seed, opts, initial)
    jobs = [(n, th, lam, opts, float(t_min), seed, i) for i, (_, th, lam) in enumerate(seeds)]
    return _best(_run_jobs(jobs, opts), len(jobs))


@dataclass(frozen=True)
class SweepRow:
    N: int
    best_value: float
    grad_norm: float
    starts: int
    result: OptimizationResult


def sweep_N(n: int, N_range=None, starts: int = 64, seed: int = 0,
            options: OptimizerOptions | None = None) -> list[SweepRow]:
    """Best value for each atom count; each N is also seeded from the N - 1 winner plus a light atom.

    Half the random starts draw the total mass from the default window and half
    from [0.5, 2n + 1]: with few atoms the best weight is far from 1 (a single
    atom peaks near t ~ n).
    """
    opts = options or OptimizerOptions()
    wide = replace(opts, t_window=(0.5, 2.0 * n + 1.0))
    N_range = list(range(1, n + 1)) if N_range is None else sorted(N_range)
    if any(N < 1 for N in N_range):
        raise ValueError("atom counts must be >= 1")
    rows: list[SweepRow] = []
    prev: OptimizationResult | None = None
    for N in N_range:
        initial = []
        if prev is not None and prev.config.N < N:
            th0, lam0 = prev.config.thetas, prev.config.lambdas
            extra = N - len(th0)
            gaps = np.linspace(0.0, TWO_PI, 2 * extra + 2)[1:-1:2]
            initial.append((np.r_[th0, (th0[0] + 0.5 + gaps) % TWO_PI], np.r_[lam0, np.full(extra, 1e-3)]))
        half = max(1, starts // 2)
        a = maximize(n, N, starts=half, seed=seed + N, options=opts, initial=initial)
        b = maximize(n, N, starts=max(1, starts - half), seed=seed + N + 7919, options=wide)
        res = a if a.value >= b.value else b
        res = replace(res, starts_used=a.starts_used + b.starts_used, iterations=a.iterations + b.iterations)
        if prev is not None and prev.value > res.value:
            # a smaller family is contained in this one; keep the better witness
            res = replace(prev, starts_used=res.starts_used)
        rows.append(SweepRow(N, res.value, res.grad_norm, res.starts_used, res))
        prev = res
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    lines = ["N,best_value,grad_norm,starts"]
    lines += [f"{r.N},{r.best_value!r},{r.grad_norm!r},{r.starts}" for r in rows]
    return "\n".join(lines) + "\n"
