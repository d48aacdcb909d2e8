"""Aggregate catastrophe losses: Poisson arrivals, shots and the Markovian
shot-noise ``L_t = sum_{theta_i <= t} y_i exp(alpha (t - theta_i))``.

``alpha = 0`` is the compound Poisson process. Paths are stored exactly as
event lists; nothing here discretises time.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import stats

from .severity import Exponential, SeverityModel
from .streams import map_blocks, substream


@dataclass(frozen=True)
class PiecewiseIntensity:
    """Piecewise-constant arrival rate: ``rates[k]`` on ``[breaks[k], breaks[k+1])``.

    ``breaks`` starts at 0; the last rate applies beyond the last break.
    """

    breaks: tuple
    rates: tuple

    def __post_init__(self):
        b = np.asarray(self.breaks, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        if len(b) != len(r) or len(b) == 0:
            raise ValueError("breaks and rates must have the same non-zero length")
        if b[0] != 0 or np.any(np.diff(b) <= 0):
            raise ValueError("breaks must start at 0 and be strictly increasing")
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise ValueError("rates must be finite and non-negative")

    def __call__(self, t):
        idx = np.searchsorted(np.asarray(self.breaks), np.asarray(t, dtype=float), side="right") - 1
        return np.asarray(self.rates, dtype=float)[np.maximum(idx, 0)]

    def bound(self) -> float:
        return float(max(self.rates))

    def integral(self, t: float) -> float:
        """Cumulative intensity on ``[0, t]``."""
        b = np.append(np.asarray(self.breaks, dtype=float), np.inf)
        lengths = np.clip(np.minimum(b[1:], t) - b[:-1], 0.0, None)
        return float(np.dot(lengths, self.rates))


Intensity = Union[float, PiecewiseIntensity, Callable]


@dataclass(frozen=True)
class ShotNoiseSpec:
    lambda_n: Intensity
    alpha: float
    severity: SeverityModel
    # rate bound for thinning when lambda_n is an arbitrary callable
    lambda_bound: float | None = None

    def __post_init__(self):
        if self.alpha < 0 or not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if isinstance(self.lambda_n, (int, float)) and not self.lambda_n >= 0:
            raise ValueError(f"lambda_n must be >= 0, got {self.lambda_n}")

    @property
    def homogeneous(self) -> bool:
        return isinstance(self.lambda_n, (int, float))

    @property
    def rate(self) -> float:
        if not self.homogeneous:
            raise ValueError("constant arrival rate requested for an inhomogeneous spec")
        return float(self.lambda_n)

    def impulse(self, t, x):
        """``H(t, x) = x exp(alpha t)``."""
        return np.asarray(x) * np.exp(self.alpha * np.asarray(t))

    def check_square_integrable(self):
        """Reject severities with infinite second moment (e.g. Pareto with a <= 2)."""
        if not math.isfinite(self.severity.second_moment()):
            raise ValueError(f"{self.severity} has an infinite second moment")


@dataclass
class LossPath:
    horizon: float
    theta: np.ndarray = field(default_factory=lambda: np.empty(0))
    y: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        if self.theta.shape != self.y.shape:
            raise ValueError("theta and y must have equal length")
        if np.any(np.diff(self.theta) <= 0):
            raise ValueError("event times must be strictly increasing")
        if np.any(self.y < 0):
            raise ValueError("shots must be non-negative")
        if len(self.theta) and (self.theta[0] <= 0 or self.theta[-1] > self.horizon):
            raise ValueError("event times must lie in (0, horizon]")

    def __len__(self):
        return len(self.theta)

    @property
    def events(self):
        return list(zip(self.theta.tolist(), self.y.tolist()))

    def loss(self, t, alpha: float):
        """Aggregate loss at time(s) ``t``."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0) or np.any(t_arr > self.horizon):
            raise ValueError(f"t must lie in [0, {self.horizon}]")
        if alpha == 0:
            # compound Poisson: correctly rounded sum of the shots so far
            prefix = np.array([math.fsum(self.y[:k]) for k in range(len(self.y) + 1)])
            out = prefix[np.searchsorted(self.theta, t_arr, side="right")]
            return float(out) if out.ndim == 0 else out
        tt = t_arr[..., None]
        live = self.theta <= tt
        contrib = np.where(live, self.y * np.exp(alpha * np.where(live, tt - self.theta, 0.0)), 0.0)
        out = contrib.sum(axis=-1)
        return float(out) if out.ndim == 0 else out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("theta,y\n")
        for th, y in zip(self.theta, self.y):
            buf.write(f"{th:.10g},{y:.10g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, horizon: float) -> "LossPath":
        rows = list(csv.DictReader(io.StringIO(text)))
        if rows and list(rows[0].keys()) != ["theta", "y"]:
            raise ValueError("expected header 'theta,y'")
        return cls(horizon, [float(r["theta"]) for r in rows], [float(r["y"]) for r in rows])


def simulate_arrivals(lambda_n: Intensity, horizon: float, rng: np.random.Generator,
                      bound: float | None = None) -> np.ndarray:
    """Poisson arrival times on ``(0, horizon]``.

    Constant rates use exponential inter-arrival times; time-varying rates
    are thinned against ``bound`` (taken from the intensity when it is a
    :class:`PiecewiseIntensity`).
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if isinstance(lambda_n, (int, float)):
        return _homogeneous(float(lambda_n), horizon, rng)
    if bound is None:
        if isinstance(lambda_n, PiecewiseIntensity):
            bound = lambda_n.bound()
        else:
            raise ValueError("a time-varying intensity needs an explicit finite bound")
    if not (math.isfinite(bound) and bound >= 0):
        raise ValueError("intensity bound must be finite and non-negative")
    cand = _homogeneous(bound, horizon, rng)
    if len(cand) == 0:
        return cand
    rates = np.asarray(lambda_n(cand), dtype=float)
    if np.any(rates > bound * (1 + 1e-12)) or np.any(rates < 0):
        raise ValueError("intensity exceeds its declared bound (or is negative)")
    keep = rng.uniform(size=len(cand)) * bound < rates
    return cand[keep]


def _homogeneous(rate: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    if rate < 0:
        raise ValueError("intensity must be non-negative")
    times = []
    if rate == 0:
        return np.empty(0)
    t = rng.exponential(1.0 / rate)
    while t <= horizon:
        times.append(t)
        t += rng.exponential(1.0 / rate)
    return np.asarray(times, dtype=float)


def simulate_path(spec: ShotNoiseSpec, horizon: float, rng: np.random.Generator) -> LossPath:
    theta = simulate_arrivals(spec.lambda_n, horizon, rng, spec.lambda_bound)
    y = spec.severity.sample(rng, len(theta))
    return LossPath(horizon, theta, y)


def evaluate(path: LossPath, spec: ShotNoiseSpec, t):
    return path.loss(t, spec.alpha)


@dataclass
class PathBatch:
    """Many loss paths in flat (CSR-like) layout: events of path ``k`` are
    ``theta[offsets[k]:offsets[k+1]]``, sorted within each path."""

    horizon: float
    counts: np.ndarray
    theta: np.ndarray
    y: np.ndarray

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.counts)])

    @property
    def path_index(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.counts)), self.counts)

    def __len__(self):
        return len(self.counts)

    def path(self, k: int) -> LossPath:
        o = self.offsets
        return LossPath(self.horizon, self.theta[o[k]:o[k + 1]], self.y[o[k]:o[k + 1]])

    def loss(self, t: float, alpha: float) -> np.ndarray:
        w = np.where(self.theta <= t, self.y * np.exp(alpha * np.maximum(t - self.theta, 0.0)), 0.0)
        return np.bincount(self.path_index, weights=w, minlength=len(self.counts))


def simulate_batch(spec: ShotNoiseSpec, horizon: float, n: int, rng: np.random.Generator) -> PathBatch:
    """Vectorised equivalent of ``n`` calls to :func:`simulate_path`.

    Homogeneous arrivals use the order-statistics property (Poisson count,
    then sorted uniforms); inhomogeneous ones are thinned from a bounding
    homogeneous batch.
    """
    if spec.homogeneous:
        bound = spec.rate
    else:
        bound = spec.lambda_bound
        if bound is None:
            if not isinstance(spec.lambda_n, PiecewiseIntensity):
                raise ValueError("a time-varying intensity needs an explicit finite bound")
            bound = spec.lambda_n.bound()
    counts = rng.poisson(bound * horizon, n)
    total = int(counts.sum())
    theta = rng.uniform(0.0, horizon, total)
    idx = np.repeat(np.arange(n), counts)
    if not spec.homogeneous and total:
        rates = np.asarray(spec.lambda_n(theta), dtype=float)
        if np.any(rates > bound * (1 + 1e-12)) or np.any(rates < 0):
            raise ValueError("intensity exceeds its declared bound (or is negative)")
        keep = rng.uniform(size=total) * bound < rates
        theta, idx = theta[keep], idx[keep]
        counts = np.bincount(idx, minlength=n)
    order = np.lexsort((theta, idx))
    theta = theta[order]
    y = spec.severity.sample(rng, len(theta))
    return PathBatch(horizon, counts, theta, np.asarray(y, dtype=float))


def aggregate_cdf_mc(spec: ShotNoiseSpec, t: float, d: float, n_paths: int, seed: int = 0,
                     tag: str = "aggregate-cdf") -> tuple[float, float]:
    """Monte Carlo ``P(L_t <= d)`` with its binomial standard error."""
    if t < 0 or not d > 0:
        raise ValueError("need t >= 0 and d > 0")
    if n_paths < 1000:
        raise ValueError("n_paths must be at least 1000")
    if t == 0:
        return 1.0, 0.0

    def block(k, n):
        batch = simulate_batch(spec, t, n, substream(seed, tag, k))
        return int(np.count_nonzero(batch.loss(t, spec.alpha) <= d))

    hits = sum(map_blocks(block, n_paths))
    p = hits / n_paths
    return p, math.sqrt(p * (1 - p) / n_paths)


def _lattice_masses(severity: SeverityModel, h: float, n: int) -> np.ndarray:
    """Mass-rounding discretisation on ``{0, h, 2h, ...}``: point ``k h`` gets
    ``F((k + 1/2) h) - F((k - 1/2) h)``."""
    edges = (np.arange(n + 1) + 0.5) * h
    cdf = np.asarray(severity.cdf(edges), dtype=float)
    return np.diff(np.concatenate([[0.0], cdf]))


def _panjer_once(lam_t: float, severity: SeverityModel, d: float, h: float) -> float:
    m = int(math.floor(d / h + 1e-9))
    g = _lattice_masses(severity, h, m)
    f = np.empty(m + 1)
    f[0] = math.exp(lam_t * (g[0] - 1.0))
    jg = np.arange(m + 1) * g
    for k in range(1, m + 1):
        f[k] = lam_t / k * np.dot(jg[1:k + 1], f[k - 1::-1])
    return float(min(f.sum(), 1.0))


def panjer_cdf(lambda_n: float, severity: SeverityModel, t: float, d: float, grid_step: float,
               tol: float = 1e-4, max_halvings: int = 14) -> float:
    """Compound Poisson ``P(L_t <= d)`` by lattice discretisation and the
    Panjer recursion, halving ``grid_step`` until two successive answers
    differ by less than ``tol``."""
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    lam_t = float(lambda_n) * t
    if lam_t == 0:
        return 1.0
    prev = _panjer_once(lam_t, severity, d, grid_step)
    h = grid_step
    for _ in range(max_halvings):
        h /= 2
        cur = _panjer_once(lam_t, severity, d, h)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise RuntimeError(f"Panjer recursion did not converge (last change {abs(cur - prev):.2e}, step {h:.3g})")


def compound_poisson_exponential_cdf(lam_t, rate: float, d: float, tail: float = 1e-15):
    """Exact ``P(S <= d)`` for ``S`` compound Poisson(``lam_t``) with
    Exponential(``rate``) shots: ``sum_n Pois(n; lam_t) Gamma(n, rate).cdf(d)``."""
    lam_t = np.asarray(lam_t, dtype=float)
    n_max = int(stats.poisson.isf(tail, max(float(lam_t.max(initial=0.0)), 1e-12))) + 5
    n = np.arange(1, n_max + 1)
    conv = stats.gamma.cdf(d, n, scale=1.0 / rate)
    out = np.exp(-lam_t) + (stats.poisson.pmf(n, lam_t[..., None]) * conv).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


class CompoundPoissonPsi:
    """``t -> P(L_t <= d)`` for a homogeneous compound Poisson loss.

    Expands over the claim count: ``sum_n Pois(n; lambda t) F^{*n}(d)``.
    ``F^{*n}(d)`` is the Gamma CDF for exponential shots and a lattice
    convolution (step ``grid_step``) otherwise.
    """

    def __init__(self, lambda_n: float, severity: SeverityModel, d: float,
                 grid_step: float | None = None, t_max: float = 50.0, tail: float = 1e-14):
        self.lambda_n = float(lambda_n)
        self.severity = severity
        self.d = float(d)
        n_max = int(stats.poisson.isf(tail, max(self.lambda_n * t_max, 1e-12))) + 5
        if math.isinf(self.d):
            conv = np.ones(n_max + 1)
        elif isinstance(severity, Exponential):
            n = np.arange(n_max + 1)
            conv = np.where(n == 0, 1.0, stats.gamma.cdf(self.d, np.maximum(n, 1), scale=1.0 / severity.rate))
        else:
            h = grid_step if grid_step is not None else self.d / 2000.0
            m = int(math.floor(self.d / h + 1e-9))
            g = _lattice_masses(severity, h, m)
            conv = np.empty(n_max + 1)
            cur = np.zeros(m + 1)
            cur[0] = 1.0
            conv[0] = 1.0
            for k in range(1, n_max + 1):
                cur = np.convolve(cur, g)[: m + 1]
                conv[k] = cur.sum()
        self._conv = np.minimum(conv, 1.0)
        self._n = np.arange(n_max + 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        x = self.lambda_n * t
        pmf = np.exp(-x)
        out = pmf * self._conv[0]
        for n in self._n[1:]:
            pmf = pmf * x / n
            out = out + pmf * self._conv[n]
        out = np.minimum(out, 1.0)
        return float(out) if out.ndim == 0 else out


class TabulatedPsi:
    """Piecewise-linear ``t -> P(L_t <= d)`` from values on a grid, forced
    non-increasing. ``ses`` (optional) are the standard errors of the grid
    values when they come from Monte Carlo."""

    def __init__(self, times, values, ses=None):
        self.times = np.asarray(times, dtype=float)
        self.values = np.minimum.accumulate(np.asarray(values, dtype=float))
        self.ses = None if ses is None else np.asarray(ses, dtype=float)

    def __call__(self, t):
        out = np.interp(t, self.times, self.values)
        return float(out) if np.ndim(out) == 0 else out

    def se(self, t):
        if self.ses is None:
            return 0.0 if np.ndim(t) == 0 else np.zeros(np.shape(t))
        out = np.interp(t, self.times, self.ses)
        return float(out) if np.ndim(out) == 0 else out

    @classmethod
    def from_mc(cls, spec: ShotNoiseSpec, d: float, times, n_paths: int, seed: int = 0):
        vals, ses = [], []
        for i, t in enumerate(times):
            v, e = (1.0, 0.0) if t == 0 else aggregate_cdf_mc(spec, t, d, n_paths, seed, tag=f"psi-{i}")
            vals.append(v)
            ses.append(e)
        return cls(times, vals, ses)


def panjer_psi(lambda_n: float, severity: SeverityModel, d: float, grid_step: float):
    """``t -> panjer_cdf(lambda_n, severity, t, d, grid_step)``, vectorised by looping."""

    def psi(t):
        t_arr = np.asarray(t, dtype=float)
        out = np.array([panjer_cdf(lambda_n, severity, float(s), d, grid_step) for s in t_arr.ravel()])
        return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)

    return psi
