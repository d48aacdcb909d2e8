"""Single-path price studies, threshold sweeps and price surfaces for the
shot-noise trigger, returned as plain row lists ready for CSV output."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .loss_process import LossPath, simulate_path
from .model2 import (Model2State, jump_size, pre_trigger_curve, pre_trigger_price, price_at_zero,
                     trigger_time)
from .rates import ab_factors, simulate_rate_path
from .streams import substream

PRICE_PATH_HEADER = ("t", "loss", "price", "jump_flag")
DETAIL_HEADER = ("t", "loss", "pre_trigger_price", "triggered_price", "discount", "jump_flag")
JUMP_HEADER = ("theta", "y", "v_before", "v_after", "jump", "relative_jump", "formula_jump")
SWEEP_HEADER = ("t", "loss", "threshold", "price", "pre_trigger_price")
SURFACE_HEADER = ("maturity", "threshold", "price")
CPP_HEADER = ("t", "loss_shot_noise", "price_shot_noise", "loss_compound_poisson", "price_compound_poisson")


class ValidationFailure(RuntimeError):
    pass


@dataclass
class Scenario:
    """Frozen randomness of one study: loss path, trigger level draw and
    short-rate path on ``grid``."""

    path: LossPath
    theta_level: float
    grid: np.ndarray
    rates: np.ndarray


def make_grid(T: float, step: float, events=()) -> np.ndarray:
    n = int(math.floor(T / step + 1e-9))
    grid = np.arange(n + 1) * step
    grid = np.union1d(grid, [T])
    ev = [e for e in events if 0 < e <= T]
    return np.union1d(grid, ev)


def draw_scenario(cfg: ScenarioConfig, seed: int | None = None) -> Scenario:
    seed = cfg.seed if seed is None else seed
    T = cfg.maturity
    path = simulate_path(cfg.shot_noise(), T, substream(seed, "path-loss"))
    level = float(substream(seed, "path-trigger").exponential())
    grid = make_grid(T, cfg.grid_step, path.theta)
    rates = simulate_rate_path(cfg.cir(), grid, substream(seed, "path-rates"))
    return Scenario(path, level, grid, rates)


def _discount(state: Model2State, grid, rates):
    a, b = ab_factors(state.rates, state.T - grid)
    return np.exp(a - b * rates)


def price_path(state: Model2State, sc: Scenario):
    """Rows of ``DETAIL_HEADER`` and rows of ``JUMP_HEADER`` (non-zero
    jumps only)."""
    alpha = state.spec.alpha
    tau = trigger_time(sc.path, alpha, state.D * sc.theta_level)
    pre = pre_trigger_curve(state, sc.path, sc.grid, sc.rates)
    loss = sc.path.loss(sc.grid, alpha)
    disc = _discount(state, sc.grid, sc.rates)
    events = set(sc.path.theta.tolist())
    rows = [(t, l, v, v * (t < tau), q, int(t in events))
            for t, l, v, q in zip(sc.grid.tolist(), loss.tolist(), pre.tolist(), disc.tolist())]
    jumps = []
    for th, y in zip(sc.path.theta, sc.path.y):
        if th > state.T:
            continue
        r_t = float(np.interp(th, sc.grid, sc.rates))
        before = pre_trigger_price(state, th, sc.path, r_t, left=True)
        after = pre_trigger_price(state, th, sc.path, r_t)
        formula = jump_size(state, th, y, before)
        if formula != 0.0 or after != before:
            jumps.append((th, y, before, after, after - before, after / before - 1.0, formula))
    return rows, jumps


def check_jumps(jumps, rel_tol: float = 1e-12):
    for row in jumps:
        jump, formula = row[4], row[6]
        if abs(jump - formula) > rel_tol * max(abs(formula), abs(row[2])):
            raise ValidationFailure(f"price jump {jump!r} at t={row[0]} differs from formula {formula!r}")


def threshold_sweep(cfg: ScenarioConfig, sc: Scenario, thresholds=None):
    thresholds = sorted(cfg.thresholds if thresholds is None else thresholds)
    rows = []
    curves = {}
    for D in thresholds:
        state = cfg.model2_state(threshold=D)
        tau = trigger_time(sc.path, state.spec.alpha, D * sc.theta_level)
        pre = pre_trigger_curve(state, sc.path, sc.grid, sc.rates)
        price = pre * (sc.grid < tau)
        curves[D] = (pre, price)
        loss = sc.path.loss(sc.grid, state.spec.alpha)
        rows += [(t, l, D, p, v) for t, l, p, v in zip(sc.grid.tolist(), loss.tolist(), price.tolist(), pre.tolist())]
    for lo, hi in zip(thresholds[:-1], thresholds[1:]):
        for k in (0, 1):
            if np.any(curves[hi][k] < curves[lo][k] * (1 - 1e-12)):
                raise ValidationFailure(f"price curve for D={hi} falls below the one for D={lo}")
    return rows, curves


def surface(cfg: ScenarioConfig):
    mats = list(cfg.surface_maturities)
    ths = list(cfg.surface_thresholds)
    v = np.array([[price_at_zero(cfg.model2_state(threshold=D, maturity=T)) for D in ths] for T in mats])
    return mats, ths, v


def surface_violations(mats, ths, v) -> list[str]:
    """Adjacent pairs breaking monotonicity (non-increasing in maturity,
    non-decreasing in threshold); exact comparisons."""
    bad = []
    order_t, order_d = np.argsort(mats), np.argsort(ths)
    v = v[order_t][:, order_d]
    for i in range(v.shape[0] - 1):
        for j in range(v.shape[1]):
            if not v[i + 1, j] <= v[i, j]:
                bad.append(f"maturity step {i}->{i + 1} at threshold index {j}")
    for i in range(v.shape[0]):
        for j in range(v.shape[1] - 1):
            if not v[i, j + 1] >= v[i, j]:
                bad.append(f"threshold step {j}->{j + 1} at maturity index {i}")
    return bad


def compound_poisson_comparison(cfg: ScenarioConfig, sc: Scenario):
    """Same events priced with the growing shot-noise and with ``alpha = 0``."""
    out = {}
    for name, alpha in (("sn", cfg.alpha), ("cpp", 0.0)):
        state = cfg.model2_state(alpha=alpha)
        tau = trigger_time(sc.path, alpha, state.D * sc.theta_level)
        pre = pre_trigger_curve(state, sc.path, sc.grid, sc.rates)
        out[name] = (sc.path.loss(sc.grid, alpha), pre * (sc.grid < tau))
    rows = [(t, a, b, c, d) for t, a, b, c, d in zip(sc.grid.tolist(), out["sn"][0].tolist(), out["sn"][1].tolist(),
                                                     out["cpp"][0].tolist(), out["cpp"][1].tolist())]
    return rows
