"""Cox-construction trigger driven by a Markovian shot-noise loss.

The trigger is ``tau = inf{t : L_t / D > Theta}`` with ``Theta`` a unit
exponential independent of everything else, so that
``P(tau > t | F_t) = Z_t = exp(-L_t / D)``.

With a constant claim rate the zero-coupon price (no recovery) is::

    V_t(T) = 1{t < tau} P exp( lambda int_t^T (phi(e^{alpha (T-s)} / D) - 1) ds
                               - (e^{alpha (T-t)} - 1) L_t / D ) Q_t(T)

where ``phi`` is the shot Laplace transform and ``Q_t(T)`` the CIR bond.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contracts import CatBondContract
from .loss_process import LossPath, PathBatch, PiecewiseIntensity, ShotNoiseSpec
from .quadrature import quad
from .rates import CirParams, ab_factors, bond_price

QUAD_TOL = 1e-10


@dataclass(frozen=True)
class Model2State:
    spec: ShotNoiseSpec
    contract: CatBondContract
    rates: CirParams

    def __post_init__(self):
        self.spec.check_square_integrable()

    @property
    def D(self) -> float:
        return self.contract.threshold

    @property
    def T(self) -> float:
        return self.contract.maturity

    def lam(self, s):
        lam = self.spec.lambda_n
        if isinstance(lam, (int, float)):
            return np.full(np.shape(s), float(lam)) if np.ndim(s) else float(lam)
        return lam(s)

    def phi(self, u):
        return self.spec.severity.laplace(u)

    def breakpoints(self, lo: float, hi: float):
        if isinstance(self.spec.lambda_n, PiecewiseIntensity):
            return tuple(b for b in self.spec.lambda_n.breaks if lo < b < hi)
        return ()


def loss_exponent(state: Model2State, t: float, u: float, tol: float = QUAD_TOL) -> float:
    """``int_t^u lambda(s) (phi(e^{alpha (u - s)} / D) - 1) ds`` (non-positive)."""
    if u <= t:
        return 0.0
    spec, D = state.spec, state.D
    if spec.homogeneous and spec.rate == 0:
        return 0.0

    def f(s):
        s = np.asarray(s, dtype=float)
        return state.lam(s) * (np.asarray(state.phi(np.exp(spec.alpha * (u - s)) / D)) - 1.0)

    val, _ = quad(f, t, u, epsabs=tol, points=state.breakpoints(t, u))
    return val


def survival_c(state: Model2State, u: float) -> float:
    """``P(tau > u) = E[exp(-L_u / D)]``."""
    if u < 0:
        raise ValueError("u must be non-negative")
    return math.exp(loss_exponent(state, 0.0, u))


def trigger_time(path: LossPath, alpha: float, level: float) -> float:
    """First time the aggregate loss of ``path`` exceeds ``level``; ``inf``
    if that does not happen by the path horizon."""
    loss = 0.0
    prev = 0.0
    for th, y in zip(path.theta, path.y):
        grown = loss * math.exp(alpha * (th - prev))
        if grown > level:
            return prev + math.log(level / loss) / alpha
        loss = grown + y
        prev = th
        if loss > level:
            return th
    if loss > 0 and alpha > 0 and loss * math.exp(alpha * (path.horizon - prev)) > level:
        return prev + math.log(level / loss) / alpha
    return math.inf


def simulate_trigger(state: Model2State, path: LossPath, rng: np.random.Generator) -> float:
    level = state.D * rng.exponential()
    return trigger_time(path, state.spec.alpha, level)


def trigger_times_batch(batch: PathBatch, alpha: float, levels: np.ndarray) -> np.ndarray:
    """Vectorised :func:`trigger_time` over all paths of ``batch``."""
    n = len(batch)
    tau = np.full(n, np.inf)
    if len(batch.theta) == 0:
        return tau
    if alpha * batch.horizon > 600:
        raise ValueError("alpha * horizon too large for the vectorised trigger scan")
    idx = batch.path_index
    off = batch.offsets
    th, y = batch.theta, batch.y
    # loss right after event k: exp(alpha th_k) * sum_{j<=k, same path} y_j exp(-alpha th_j)
    w = np.cumsum(y * np.exp(-alpha * th))
    start = np.concatenate([[0.0], w])[off[:-1]][idx]
    after = np.exp(alpha * th) * (w - start)
    before = after - y
    level = levels[idx]
    at_jump = (before <= level) & (after > level)
    nxt = np.append(th[1:], batch.horizon)
    last = np.r_[idx[1:] != idx[:-1], True]
    nxt = np.where(last, batch.horizon, nxt)
    cand = np.where(at_jump, th, np.inf)
    if alpha > 0:
        grow = (after <= level) & (after * np.exp(alpha * (nxt - th)) > level) & (after > 0)
        with np.errstate(divide="ignore"):
            t_grow = th + np.log(np.where(grow, level / np.where(after > 0, after, 1.0), 1.0)) / alpha
        cand = np.minimum(cand, np.where(grow, t_grow, np.inf))
    np.minimum.at(tau, idx, cand)
    return tau


def intensity_rate(state: Model2State, t: float, loss: float = 0.0) -> float:
    """Trigger intensity at ``t`` given the current aggregate loss.

    The jump part ``lambda(t) (1 - phi(1/D))`` comes from catastrophe
    arrivals; ``alpha * loss / D`` from the continuous growth of the
    shot-noise between arrivals (zero when ``alpha = 0`` or ``loss = 0``).
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    return jump_intensity(state, t) + state.spec.alpha * loss / state.D


def jump_intensity(state: Model2State, t: float) -> float:
    return float(state.lam(t)) * (1.0 - float(state.phi(1.0 / state.D)))


def _left_loss(path: LossPath, alpha: float, s: float) -> float:
    live = path.theta < s
    return float(np.sum(path.y[live] * np.exp(alpha * (s - path.theta[live]))))


def dual_projection_increment(state: Model2State, s: float, path: LossPath) -> float:
    """Density of the dual predictable projection at ``s`` along ``path``:
    ``Z_{s-} * intensity(s, L_{s-})``."""
    if s < 0:
        raise ValueError("s must be non-negative")
    loss = _left_loss(path, state.spec.alpha, s)
    return math.exp(-loss / state.D) * intensity_rate(state, s, loss)


def dual_projection(state: Model2State, path: LossPath, t: float, jump_part_only: bool = False) -> float:
    """``A_t`` along ``path``; with ``jump_part_only`` just the compensator
    of the loss jumps, ``int Z_{s-} lambda(s) (1 - phi(1/D)) ds``."""
    alpha, D = state.spec.alpha, state.D
    jump = 1.0 - float(state.phi(1.0 / D))
    edges = [0.0, *[th for th in path.theta if th < t], t]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        base = path.loss(a, alpha)  # right-continuous: includes the jump at a

        def f(s, a=a, base=base):
            loss = base * np.exp(alpha * (s - a))
            rate = state.lam(s) * jump
            if not jump_part_only:
                rate = rate + alpha * loss / D
            return np.exp(-loss / D) * rate

        total += quad(f, a, b, epsabs=1e-12, points=state.breakpoints(a, b))[0]
    return total


def _rate_at(state: Model2State, t: float, r_t: float | None) -> float:
    if r_t is None:
        if t != 0:
            raise ValueError("r_t is required for valuation times t > 0")
        return state.rates.r0
    return r_t


def pre_trigger_price(state: Model2State, t: float, path: LossPath, r_t: float | None = None,
                      left: bool = False) -> float:
    """Adapted price process that agrees with the bond price before the
    trigger. ``left=True`` evaluates the left limit at ``t`` (loss before
    any event exactly at ``t``)."""
    T, D = state.T, state.D
    if t > T:
        raise ValueError("valuation time after maturity")
    if t < 0:
        raise ValueError("valuation time must be non-negative")
    if state.contract.recovery != 0:
        raise ValueError("closed-form pricing under the shot-noise trigger assumes zero recovery")
    alpha = state.spec.alpha
    loss = _left_loss(path, alpha, t) if left else path.loss(t, alpha)
    expo = loss_exponent(state, t, T) - math.expm1(alpha * (T - t)) * loss / D
    q = bond_price(state.rates, _rate_at(state, t, r_t), t, T)
    return state.contract.principal * math.exp(expo) * q


def price(state: Model2State, t: float, path: LossPath, r_t: float | None = None,
          survived: bool = True) -> float:
    """Bond price at ``t``: zero once the trigger has fired."""
    v = pre_trigger_price(state, t, path, r_t)
    return v if survived else 0.0


def price_at_zero(state: Model2State) -> float:
    """``V_0(T)`` (no losses yet, ``r = r0``)."""
    return pre_trigger_price(state, 0.0, LossPath(state.T), None)


def relative_jump(state: Model2State, theta_i: float, y_i: float) -> float:
    """``exp(-y (e^{alpha (T - theta)} - 1) / D) - 1``; non-positive."""
    if theta_i > state.T:
        raise ValueError("event after maturity")
    return math.expm1(-y_i * math.expm1(state.spec.alpha * (state.T - theta_i)) / state.D)


def jump_size(state: Model2State, theta_i: float, y_i: float, v_before: float) -> float:
    return v_before * relative_jump(state, theta_i, y_i)


def pre_trigger_curve(state: Model2State, path: LossPath, times, rates=None) -> np.ndarray:
    """Pre-trigger prices on a sorted time grid.

    ``rates`` are short rates on the same grid (default ``r0`` throughout).
    The loss exponent is integrated piecewise between grid points and
    accumulated from maturity backwards.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or times[0] < 0 or times[-1] > state.T:
        raise ValueError("times must be sorted within [0, T]")
    T, D, alpha = state.T, state.D, state.spec.alpha
    knots = np.append(times, T)
    pieces = np.array([_piece(state, a, b) for a, b in zip(knots[:-1], knots[1:])])
    expo_int = np.cumsum(pieces[::-1])[::-1]
    loss = path.loss(times, alpha)
    r = np.full(len(times), state.rates.r0) if rates is None else np.asarray(rates, dtype=float)
    a, b = ab_factors(state.rates, T - times)
    q = np.exp(a - b * r)
    return state.contract.principal * np.exp(expo_int - np.expm1(alpha * (T - times)) * loss / D) * q


def _piece(state: Model2State, a: float, b: float) -> float:
    if b <= a:
        return 0.0
    spec, D, T = state.spec, state.D, state.T
    if spec.homogeneous and spec.rate == 0:
        return 0.0

    def f(s):
        return state.lam(s) * (np.asarray(state.phi(np.exp(spec.alpha * (T - s)) / D)) - 1.0)

    return quad(f, a, b, epsabs=1e-13, points=state.breakpoints(a, b))[0]
