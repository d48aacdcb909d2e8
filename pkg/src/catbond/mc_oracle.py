"""Joint Monte Carlo of losses, trigger and short rate for the shot-noise
trigger; the independent check on every closed form in :mod:`catbond.model2`.

Losses, trigger thresholds and rates use disjoint substreams keyed by
``(seed, purpose, block)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model2 import Model2State, trigger_times_batch
from .loss_process import simulate_batch
from .rates import discount_factors, pair_average
from .streams import BLOCK_SIZE, map_blocks, mean_and_se, substream


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    steps_per_year: int = 256
    seed: int = 20240101
    antithetic: bool = False
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        if self.n_paths < 1000:
            raise ValueError("n_paths must be at least 1000")
        if self.steps_per_year < 64:
            raise ValueError("steps_per_year must be at least 64")
        if self.antithetic and self.block_size % 2:
            raise ValueError("antithetic sampling needs an even block size")


@dataclass(frozen=True)
class McResult:
    value: float
    se: float
    n_paths: int


def _trigger_block(state: Model2State, horizon: float, seed: int, k: int, n: int) -> np.ndarray:
    batch = simulate_batch(state.spec, horizon, n, substream(seed, "loss", k))
    levels = state.D * substream(seed, "trigger", k).exponential(size=n)
    return trigger_times_batch(batch, state.spec.alpha, levels)


def mc_price_m2(state: Model2State, config: McConfig, t: float = 0.0) -> McResult:
    """Average of ``P exp(-int_0^T r) 1{tau > T}`` over joint simulations."""
    if t != 0:
        raise ValueError("the Monte Carlo oracle prices at t = 0 only")
    if state.contract.recovery != 0:
        raise ValueError("the Monte Carlo oracle for the shot-noise trigger assumes zero recovery")
    T, P = state.T, state.contract.principal

    def block(k, n):
        n_eff = n + (n % 2 if config.antithetic else 0)
        tau = _trigger_block(state, T, config.seed, k, n_eff)
        disc = discount_factors(state.rates, T, n_eff, config.steps_per_year,
                                substream(config.seed, "rates", k), config.antithetic)
        pay = P * disc * (tau > T)
        if config.antithetic:
            pay = pair_average(pay)
        return pay.sum(), (pay * pay).sum(), len(pay)

    res = map_blocks(block, config.n_paths, config.block_size)
    count = sum(r[2] for r in res)
    mean, se = mean_and_se([r[0] for r in res], [r[1] for r in res], count)
    return McResult(float(mean), float(se), config.n_paths)


def mc_survival(state: Model2State, u_grid, config: McConfig):
    """Empirical ``P(tau > u)`` on ``u_grid`` with binomial standard errors."""
    u = np.asarray(u_grid, dtype=float)
    if np.any(u < 0):
        raise ValueError("survival grid must be non-negative")
    horizon = max(float(u.max()), 1e-12)

    def block(k, n):
        tau = _trigger_block(state, horizon, config.seed, k, n)
        return np.count_nonzero(tau[:, None] > u[None, :], axis=0)

    hits = np.sum(np.stack(map_blocks(block, config.n_paths, config.block_size)), axis=0)
    p = hits / config.n_paths
    return p, np.sqrt(p * (1 - p) / config.n_paths)


def mc_terminal_z(state: Model2State, u: float, config: McConfig) -> McResult:
    """Monte Carlo ``E[exp(-L_u / D)]`` over loss paths alone."""

    def block(k, n):
        batch = simulate_batch(state.spec, max(u, 1e-12), n, substream(config.seed, "loss", k))
        z = np.exp(-batch.loss(u, state.spec.alpha) / state.D)
        return z.sum(), (z * z).sum()

    res = map_blocks(block, config.n_paths, config.block_size)
    mean, se = mean_and_se([r[0] for r in res], [r[1] for r in res], config.n_paths)
    return McResult(float(mean), float(se), config.n_paths)
