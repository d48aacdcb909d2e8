"""Trigger covered by a sequence of monitoring times.

The trigger is the first monitoring time ``theta_i`` at which the aggregate
loss, observed only at those times, has moved above the threshold:
``tau = theta_i`` on ``{L_{theta_{i-1}} <= D < L_{theta_i}}``. The loss process
is independent of the monitoring times, and ``Psi(t) = P(L_t <= D)`` carries
all the loss information the pricers need. Since ``L`` is non-decreasing,
``Psi`` is non-increasing in ``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .contracts import CatBondContract
from .loss_process import CompoundPoissonPsi, ShotNoiseSpec, TabulatedPsi, simulate_batch, simulate_path
from .quadrature import quad
from .streams import map_blocks, mean_and_se, substream

TAIL_TOL = 1e-6
MAX_TERMS = 10_000

# 16-point Gauss-Legendre rule on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class PoissonArrivals:
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("arrival rate must be non-negative")


@dataclass(frozen=True)
class DeterministicTimes:
    times: tuple

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("monitoring times must be positive and strictly increasing")


@dataclass(frozen=True)
class Model1Spec:
    arrival: PoissonArrivals | DeterministicTimes
    loss: ShotNoiseSpec
    contract: CatBondContract
    rate: float = 0.0

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("interest rate must be non-negative")

    @property
    def D(self) -> float:
        return self.contract.threshold


@dataclass(frozen=True)
class Model1Price:
    value: float
    se: float
    survival_term: float = math.nan
    recovery_term: float = math.nan
    n_terms: int = 0
    extra: dict = field(default_factory=dict)


def default_psi(spec: Model1Spec, horizon: float, n_paths: int = 100_000, seed: int = 0,
                grid_points: int = 61):
    """Exact series for compound Poisson losses, Monte Carlo table otherwise."""
    loss = spec.loss
    if loss.alpha == 0 and loss.homogeneous:
        return CompoundPoissonPsi(loss.rate, loss.severity, spec.D, t_max=max(horizon, 1.0))
    grid = np.linspace(0.0, horizon, grid_points)
    return TabulatedPsi.from_mc(loss, spec.D, grid, n_paths, seed)


def azema_z(thetas, psi, t: float, tol: float = 0.0) -> float:
    """``1 - sum_{theta_i <= t} (Psi(theta_{i-1}) - Psi(theta_i))`` with ``theta_0 = 0``.

    Summed exactly (``math.fsum``), so the telescoped value ``Psi(theta_m)`` is
    reproduced bit for bit. Raises if ``Psi`` increases by more than ``tol``
    along the monitoring times.
    """
    th = np.asarray(thetas, dtype=float)
    th = th[th <= t]
    if len(th) == 0:
        return 1.0
    vals = np.concatenate([[1.0], np.atleast_1d(np.asarray(psi(th), dtype=float))])
    if np.any(np.diff(vals) > tol):
        raise ValueError("Psi must be non-increasing in time (loss law violates monotonicity)")
    terms = [1.0]
    for prev, cur in zip(vals[:-1], vals[1:]):
        terms += [-prev, cur]
    return math.fsum(terms)


def _monitoring_times(spec: Model1Spec, horizon: float, rng: np.random.Generator) -> np.ndarray:
    arr = spec.arrival
    if isinstance(arr, DeterministicTimes):
        t = np.asarray(arr.times, dtype=float)
        return t[t <= horizon]
    if arr.rate == 0:
        return np.empty(0)
    n = rng.poisson(arr.rate * horizon)
    return np.sort(rng.uniform(0.0, horizon, n))


def simulate_trigger_m1(spec: Model1Spec, rng: np.random.Generator, horizon: float | None = None) -> float:
    """One draw of the trigger time; ``inf`` if it does not fire by ``horizon``."""
    horizon = spec.contract.maturity if horizon is None else horizon
    thetas = _monitoring_times(spec, horizon, rng)
    if len(thetas) == 0:
        return math.inf
    path = simulate_path(spec.loss, horizon, rng)
    hit = np.nonzero(path.loss(thetas, spec.loss.alpha) > spec.D)[0]
    return float(thetas[hit[0]]) if len(hit) else math.inf


def _batch_monitoring(spec: Model1Spec, horizon: float, n: int, rng: np.random.Generator):
    """Monitoring times of ``n`` paths in flat layout: (path index, time)."""
    arr = spec.arrival
    if isinstance(arr, DeterministicTimes):
        t = np.asarray(arr.times, dtype=float)
        t = t[t <= horizon]
        return np.repeat(np.arange(n), len(t)), np.tile(t, n)
    counts = rng.poisson(arr.rate * horizon, n)
    idx = np.repeat(np.arange(n), counts)
    th = rng.uniform(0.0, horizon, int(counts.sum()))
    order = np.lexsort((th, idx))
    return idx[order], th[order]


def trigger_times_m1_batch(spec: Model1Spec, horizon: float, n: int, seed: int, k: int) -> np.ndarray:
    """Trigger times of ``n`` independent paths (block ``k`` of ``seed``)."""
    m_idx, m_th = _batch_monitoring(spec, horizon, n, substream(seed, "m1-arrivals", k))
    tau = np.full(n, np.inf)
    if len(m_th) == 0:
        return tau
    batch = simulate_batch(spec.loss, horizon, n, substream(seed, "m1-loss", k))
    alpha = spec.loss.alpha
    # merge loss events (weight y) and monitoring points (weight 0) per path
    idx = np.concatenate([batch.path_index, m_idx])
    t = np.concatenate([batch.theta, m_th])
    w = np.concatenate([batch.y, np.zeros(len(m_th))])
    is_mon = np.concatenate([np.zeros(len(batch.theta), bool), np.ones(len(m_th), bool)])
    # at equal times the loss event sorts first (right-continuous loss)
    order = np.lexsort((is_mon, t, idx))
    idx, t, w, is_mon = idx[order], t[order], w[order], is_mon[order]
    cs = np.cumsum(w * np.exp(-alpha * t))
    first = np.r_[True, idx[1:] != idx[:-1]]
    start_pos = np.maximum.accumulate(np.where(first, np.arange(len(idx)), 0))
    base = np.concatenate([[0.0], cs])[start_pos]
    level = np.exp(alpha * t) * (cs - base)
    hit = is_mon & (level > spec.D)
    np.minimum.at(tau, idx[hit], t[hit])
    return tau


def mc_price_m1(spec: Model1Spec, T: float | None = None, n_paths: int = 100_000, seed: int = 0) -> Model1Price:
    """Direct payoff Monte Carlo:
    ``E[P e^{-rT} 1{tau > T} + delta P e^{-r tau} 1{tau <= T}]``."""
    T = spec.contract.maturity if T is None else T
    P, delta, r = spec.contract.principal, spec.contract.recovery, spec.rate

    def block(k, n):
        tau = trigger_times_m1_batch(spec, T, n, seed, k)
        alive = tau > T
        pay = np.where(alive, P * math.exp(-r * T), delta * P * np.exp(-r * np.where(alive, 0.0, tau)))
        return pay.sum(), (pay * pay).sum()

    res = map_blocks(block, n_paths)
    mean, se = mean_and_se([x[0] for x in res], [x[1] for x in res], n_paths)
    return Model1Price(float(mean), float(se))


def n_terms(rate: float, T: float, tail: float = TAIL_TOL, cap: int = MAX_TERMS) -> int:
    """Smallest ``i`` with ``P(theta_{i+1} <= T) = P(N_T >= i + 1) < tail``."""
    if rate * T == 0:
        return 1
    i = max(int(stats.poisson.isf(tail, rate * T)) - 1, 1)
    while stats.poisson.sf(i, rate * T) >= tail:
        i += 1
    while i > 1 and stats.poisson.sf(i - 1, rate * T) < tail:
        i -= 1
    if i > cap:
        raise RuntimeError(f"monitoring-time series needs {i} terms, more than the cap {cap}")
    return max(i, 1)


def price_inaccessible(spec: Model1Spec, T: float | None = None, n_paths: int = 100_000, seed: int = 0,
                       psi=None, max_index: int | None = None) -> Model1Price:
    """Price through the dual predictable projection for Poisson monitoring times.

    Each path contributes ``sum_i int_0^T (Psi(theta_{i-1}) - Psi(s)) lambda
    1{theta_{i-1} <= s < theta_i} ds`` (and its discounted version for the
    recovery leg); the expectation over arrival paths is taken by Monte
    Carlo and each segment integral by 16-point Gauss-Legendre. Terms with
    ``i`` beyond the Poisson tail cut-off (or ``max_index``) are dropped.
    """
    if not isinstance(spec.arrival, PoissonArrivals):
        raise ValueError("price_inaccessible needs Poisson monitoring times")
    T = spec.contract.maturity if T is None else T
    psi = default_psi(spec, T) if psi is None else psi
    lam = spec.arrival.rate
    P, delta, r = spec.contract.principal, spec.contract.recovery, spec.rate
    terms = n_terms(lam, T) if max_index is None else max_index

    def block(k, n):
        rng = substream(seed, "m1-projection", k)
        counts = rng.poisson(lam * T, n)
        idx = np.repeat(np.arange(n), counts)
        th = rng.uniform(0.0, T, int(counts.sum()))
        order = np.lexsort((th, idx))
        idx, th = idx[order], th[order]
        # segment i of a path runs from theta_{i-1} to min(theta_i, T)
        first = np.r_[True, idx[1:] != idx[:-1]] if len(idx) else np.empty(0, bool)
        rank = np.arange(len(idx)) - np.maximum.accumulate(np.where(first, np.arange(len(idx)), 0))
        seg_path = np.concatenate([np.arange(n), idx])
        seg_start = np.concatenate([np.zeros(n), th])
        seg_i = np.concatenate([np.ones(n, int), rank + 2])
        nxt = np.full(n, T)
        # end of segment 1 is the first arrival (or T)
        np.minimum.at(nxt, idx, th)
        ends_after = np.append(th[1:], T)
        last = np.r_[idx[1:] != idx[:-1], True] if len(idx) else np.empty(0, bool)
        ends_after = np.where(last, T, ends_after)
        seg_end = np.concatenate([nxt, ends_after])
        keep = seg_i <= terms
        seg_path, seg_start, seg_end = seg_path[keep], seg_start[keep], seg_end[keep]
        length = seg_end - seg_start
        s = seg_start[:, None] + length[:, None] * _GL_X[None, :]
        gap = (np.asarray(psi(seg_start))[:, None] - np.asarray(psi(s))) * lam
        w = length[:, None] * _GL_W[None, :]
        a_seg = (gap * w).sum(axis=1)
        rec_seg = (gap * np.exp(-r * s) * w).sum(axis=1)
        a_path = np.bincount(seg_path, weights=a_seg, minlength=n)
        rec_path = np.bincount(seg_path, weights=rec_seg, minlength=n)
        x = P * math.exp(-r * T) * (1.0 - a_path) + delta * P * rec_path
        return x.sum(), (x * x).sum(), a_path.sum(), rec_path.sum()

    res = map_blocks(block, n_paths)
    mean, se = mean_and_se([x[0] for x in res], [x[1] for x in res], n_paths)
    ea = sum(x[2] for x in res) / n_paths
    er = sum(x[3] for x in res) / n_paths
    return Model1Price(float(mean), float(se), P * math.exp(-r * T) * (1.0 - ea), delta * P * er, terms)


def price_two_times(spec: Model1Spec, T: float | None = None, psi=None) -> float:
    """Price when only the first monitoring time can trigger (zero recovery):
    ``P e^{-rT} (1 - int_0^T (1 - Psi(s)) lambda e^{-lambda s} ds)``.

    Uses ``P(s < theta_1) = exp(-lambda s)`` so the expectation is a plain
    one-dimensional integral.
    """
    if not isinstance(spec.arrival, PoissonArrivals):
        raise ValueError("needs Poisson monitoring times")
    T = spec.contract.maturity if T is None else T
    psi = default_psi(spec, T) if psi is None else psi
    lam = spec.arrival.rate
    val, _ = quad(lambda s: (1.0 - np.asarray(psi(s))) * lam * np.exp(-lam * s), 0.0, T, epsabs=1e-12)
    return spec.contract.principal * math.exp(-spec.rate * T) * (1.0 - val)


def price_predictable(spec: Model1Spec, T: float | None = None, psi=None) -> Model1Price:
    """Zero-rate price for deterministic monitoring times:
    ``P (delta + (1 - delta) Psi(theta_m))`` with ``theta_m`` the last
    monitoring time not after ``T``."""
    if not isinstance(spec.arrival, DeterministicTimes):
        raise ValueError("price_predictable needs deterministic monitoring times")
    if spec.rate != 0:
        raise ValueError("closed form only for zero interest rate; use mc_price_m1")
    T = spec.contract.maturity if T is None else T
    psi = default_psi(spec, T) if psi is None else psi
    P, delta = spec.contract.principal, spec.contract.recovery
    z = azema_z(spec.arrival.times, psi, T, tol=getattr(psi, "monotone_tol", 0.0))
    se = 0.0
    se_fn = getattr(psi, "se", None)
    times = [t for t in spec.arrival.times if t <= T]
    if se_fn is not None and times:
        se = P * (1.0 - delta) * float(se_fn(times[-1]))
    return Model1Price(P * (delta + (1.0 - delta) * z), se, P * z, P * delta * (1.0 - z))
