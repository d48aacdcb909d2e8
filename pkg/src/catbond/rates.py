"""Cox-Ingersoll-Ross short rate: closed-form discount bond and exact
transition sampling for the Monte Carlo discount leg."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .streams import map_blocks, mean_and_se, substream


@dataclass(frozen=True)
class CirParams:
    """``dr = gamma_r (theta_cir - r) dt + sigma sqrt(r) dW``, ``r(0) = r0``."""

    r0: float
    gamma_r: float
    theta_cir: float
    sigma: float

    def __post_init__(self):
        if self.r0 < 0:
            raise ValueError("r0 must be non-negative")
        if not (self.gamma_r > 0 and self.theta_cir >= 0 and self.sigma > 0):
            raise ValueError("gamma_r and sigma must be positive, theta_cir non-negative")

    @property
    def h(self) -> float:
        return math.sqrt(self.gamma_r**2 + 2.0 * self.sigma**2)

    @property
    def feller(self) -> bool:
        return 2.0 * self.gamma_r * self.theta_cir > self.sigma**2

    @property
    def dof(self) -> float:
        return 4.0 * self.gamma_r * self.theta_cir / self.sigma**2


def ab_factors(p: CirParams, tau):
    """``A_t(T)`` and ``B_t(T)`` as functions of ``tau = T - t``."""
    tau = np.asarray(tau, dtype=float)
    g, h = p.gamma_r, p.h
    # scaled by exp(-h tau) to stay finite for large h tau; h - g written as
    # 2 sigma^2 / (h + g) to avoid cancellation when sigma is tiny
    em = np.exp(-h * tau)
    hmg = 2.0 * p.sigma**2 / (h + g)
    den = hmg * em + (h + g)
    k = 2.0 * g * p.theta_cir
    a = -k * tau / (h + g) - k / p.sigma**2 * np.log1p(-hmg * (1.0 - em) / (2.0 * h))
    b = 2.0 * (1.0 - em) / den
    return a, b


def bond_price(p: CirParams, r_t, t: float, T):
    """``Q_t(T) = exp(A_t(T) - B_t(T) r_t)``."""
    T_arr = np.asarray(T, dtype=float)
    if np.any(T_arr < t):
        raise ValueError("maturity must not precede the valuation time")
    if np.any(np.asarray(r_t) < 0):
        raise ValueError("short rate must be non-negative")
    a, b = ab_factors(p, T_arr - t)
    out = np.exp(a - b * np.asarray(r_t, dtype=float))
    return float(out) if out.ndim == 0 else out


def _transition(p: CirParams, r: np.ndarray, dt: float, rng: np.random.Generator,
                antithetic: bool = False) -> np.ndarray:
    """Exact draw of ``r(t + dt)`` given ``r(t)`` (scaled noncentral chi-square).

    With ``antithetic`` the second half of ``r`` reuses the first half's
    normals with flipped sign (requires ``dof > 1``).
    """
    g = p.gamma_r
    ed = math.exp(-g * dt)
    c = p.sigma**2 * (1.0 - ed) / (4.0 * g)
    nc = r * ed / c
    df = p.dof
    if df == 0:
        k = rng.poisson(0.5 * nc)
        return c * np.where(k > 0, rng.gamma(np.maximum(k, 1), 2.0), 0.0)
    if not antithetic:
        return c * rng.noncentral_chisquare(df, np.maximum(nc, 1e-300))
    if df <= 1:
        raise ValueError("antithetic CIR sampling needs 4 gamma theta / sigma^2 > 1")
    half = len(r) // 2
    z = rng.standard_normal(half)
    z = np.concatenate([z, -z])
    chi = rng.chisquare(df - 1.0, half)
    chi = np.concatenate([chi, chi])
    return c * ((z + np.sqrt(nc)) ** 2 + chi)


def simulate_rate_path(p: CirParams, grid, rng: np.random.Generator, n_paths: int | None = None):
    """Short rate on ``grid`` (must start at 0). Returns shape ``(len(grid),)``
    or ``(n_paths, len(grid))``."""
    grid = np.asarray(grid, dtype=float)
    if grid[0] != 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must start at 0 and be increasing")
    m = 1 if n_paths is None else n_paths
    out = np.empty((m, len(grid)))
    out[:, 0] = p.r0
    for k in range(1, len(grid)):
        out[:, k] = _transition(p, out[:, k - 1], grid[k] - grid[k - 1], rng)
    return out[0] if n_paths is None else out


def discount_factors(p: CirParams, T: float, n: int, steps_per_year: int,
                     rng: np.random.Generator, antithetic: bool = False) -> np.ndarray:
    """Per-path ``exp(-int_0^T r ds)`` with the integral by the trapezoid rule.

    Under ``antithetic`` paths ``k`` and ``k + n/2`` form a pair.
    """
    if antithetic and n % 2:
        raise ValueError("antithetic sampling needs an even path count")
    steps = max(1, math.ceil(T * steps_per_year))
    dt = T / steps
    r = np.full(n, float(p.r0))
    integral = 0.5 * r * dt
    for _ in range(steps - 1):
        r = _transition(p, r, dt, rng, antithetic)
        integral += r * dt
    r = _transition(p, r, dt, rng, antithetic)
    integral += 0.5 * r * dt
    return np.exp(-integral)


def pair_average(x: np.ndarray) -> np.ndarray:
    half = len(x) // 2
    return 0.5 * (x[:half] + x[half:])


def mc_discount(p: CirParams, T: float, n_paths: int, steps_per_year: int = 256, seed: int = 0,
                antithetic: bool = False, tag: str = "rates") -> tuple[float, float]:
    """Monte Carlo ``E[exp(-int_0^T r ds)]`` and its standard error."""
    if n_paths < 1000:
        raise ValueError("n_paths must be at least 1000")
    if T == 0:
        return 1.0, 0.0

    def block(k, n):
        rng = substream(seed, tag, k)
        if antithetic:
            x = pair_average(discount_factors(p, T, n + n % 2, steps_per_year, rng, True))
        else:
            x = discount_factors(p, T, n, steps_per_year, rng)
        return x.sum(), (x * x).sum(), len(x)

    res = map_blocks(block, n_paths)
    count = sum(r[2] for r in res)
    mean, se = mean_and_se([r[0] for r in res], [r[1] for r in res], count)
    return float(mean), float(se)
