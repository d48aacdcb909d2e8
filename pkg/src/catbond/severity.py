"""Shot (catastrophe loss amount) distributions and their Laplace transforms."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .quadrature import QuadratureError, quad

_EPS = np.finfo(float).eps


def lambert_w(x, max_iter: int = 50):
    """Principal branch of the Lambert W function for ``x >= 0``.

    Halley iteration on ``w * exp(w) - x`` started from ``log1p(x)``.
    Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("lambert_w is only implemented for x >= 0")
    w = np.log1p(arr)
    active = np.ones(arr.shape, dtype=bool)
    for _ in range(max_iter):
        ew = np.exp(w)
        f = w * ew - arr
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        step = np.where(active, step, 0.0)
        w = w - step
        active = np.abs(step) > 2.0 * _EPS * np.maximum(np.abs(w), _EPS)
        if not active.any():
            break
    else:
        raise RuntimeError("lambert_w did not converge")
    return float(w) if w.ndim == 0 else w


def _out(y):
    y = np.asarray(y, dtype=float)
    return float(y) if y.ndim == 0 else y


def _check_nonneg(x):
    if np.any(np.asarray(x) < 0):
        raise ValueError("argument must be non-negative")


class SeverityModel:
    """Common interface of the three shot distributions.

    Subclasses provide ``cdf``, ``pdf``, ``sample``, ``laplace`` and
    ``laplace_oracle``. The oracle is brute-force adaptive quadrature over
    the density (SciPy's QUADPACK) and shares no code with ``laplace``.
    """

    def mean(self) -> float:
        raise NotImplementedError

    def second_moment(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(SeverityModel):
    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"Exponential rate must be positive and finite, got {self.rate}")

    def cdf(self, x):
        _check_nonneg(x)
        return _out(-np.expm1(-self.rate * np.asarray(x, dtype=float)))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.exponential(1.0 / self.rate, size)

    def laplace(self, u):
        _check_nonneg(u)
        return _out(self.rate / (self.rate + np.asarray(u, dtype=float)))

    def laplace_oracle(self, u: float) -> float:
        return _density_oracle(self, u)

    def mean(self) -> float:
        return 1.0 / self.rate

    def second_moment(self) -> float:
        return 2.0 / self.rate**2


@dataclass(frozen=True)
class LogNormal(SeverityModel):
    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"LogNormal sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise ValueError("LogNormal mu must be finite")

    def cdf(self, x):
        _check_nonneg(x)
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(x) - self.mu) / self.sigma
        return _out(ndtr(z))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        pos = x > 0
        xs = np.where(pos, x, 1.0)
        z = (np.log(xs) - self.mu) / self.sigma
        dens = np.exp(-0.5 * z * z) / (xs * self.sigma * math.sqrt(2.0 * math.pi))
        return np.where(pos, dens, 0.0)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.lognormal(self.mu, self.sigma, size)

    def laplace(self, u):
        """Saddle-point approximation through the Lambert W function.

        ``phi(u) ~ exp(-(W**2 + 2W) / (2 sigma**2)) / sqrt(1 + W)`` with
        ``W = W(u sigma**2 exp(mu))``. Relative error is below 3e-4 for
        ``mu = 6.387, sigma = 0.153`` on ``u`` in ``[1e-6, 1e-2]``.
        """
        _check_nonneg(u)
        s2 = self.sigma**2
        w = lambert_w(np.asarray(u, dtype=float) * s2 * math.exp(self.mu))
        return _out(np.exp(-(w * w + 2.0 * w) / (2.0 * s2)) / np.sqrt(1.0 + w))

    def laplace_oracle(self, u: float) -> float:
        # log-space substitution x = exp(mu + sigma z) against the N(0,1) density
        _check_nonneg(u)
        if u == 0:
            return 1.0

        def integrand(z):
            return math.exp(-u * math.exp(self.mu + self.sigma * z) - 0.5 * z * z)

        # the mass sits in z in [-12, 12]; the exp(-u x) factor only narrows it
        val, err = integrate.quad(integrand, -12.0, 12.0, epsabs=1e-13, epsrel=1e-12,
                                  limit=400)
        val /= math.sqrt(2.0 * math.pi)
        err /= math.sqrt(2.0 * math.pi)
        if err > 1e-10:
            raise QuadratureError("log-normal Laplace oracle", val, err)
        return val

    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma**2)

    def second_moment(self) -> float:
        return math.exp(2.0 * self.mu + 2.0 * self.sigma**2)


@dataclass(frozen=True)
class Pareto(SeverityModel):
    """Lomax (Pareto type II): ``F(x) = 1 - (b / (b + x))**a``."""

    a: float
    b: float

    def __post_init__(self):
        if not (0 < self.a < math.inf and 0 < self.b < math.inf):
            raise ValueError(f"Pareto a and b must be positive, got a={self.a}, b={self.b}")

    def cdf(self, x):
        _check_nonneg(x)
        x = np.asarray(x, dtype=float)
        return _out(-np.expm1(-self.a * np.log1p(x / self.b)))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, 0.0)
        return np.where(x >= 0, self.a / self.b * (1.0 + xs / self.b) ** (-self.a - 1.0), 0.0)

    def sample(self, rng: np.random.Generator, size=None):
        return self.b * rng.pareto(self.a, size)

    def laplace(self, u, epsabs: float = 1e-10):
        _check_nonneg(u)
        if np.ndim(u):
            return np.array([self.laplace(float(v), epsabs) for v in np.ravel(u)]).reshape(np.shape(u))
        u = float(u)
        if u == 0:
            return 1.0
        a, b = self.a, self.b
        # x = b * s: int_0^inf exp(-u b s) a (1 + s)^(-a-1) ds
        val, _ = quad(lambda s: a * np.exp(-u * b * s) * (1.0 + s) ** (-a - 1.0),
                      0.0, np.inf, epsabs=epsabs)
        return val

    def laplace_oracle(self, u: float) -> float:
        return _density_oracle(self, u)

    def mean(self) -> float:
        return self.b / (self.a - 1.0) if self.a > 1 else math.inf

    def second_moment(self) -> float:
        if self.a <= 2:
            return math.inf
        return 2.0 * self.b**2 / ((self.a - 1.0) * (self.a - 2.0))


def _density_oracle(model: SeverityModel, u: float) -> float:
    _check_nonneg(u)
    val, err = integrate.quad(lambda x: math.exp(-u * x) * float(model.pdf(x)), 0.0, np.inf,
                              epsabs=1e-12, epsrel=1e-12, limit=400)
    if err > 1e-10:
        raise QuadratureError("Laplace oracle", val, err)
    return val


def cdf(model: SeverityModel, x):
    return model.cdf(x)


def sample(model: SeverityModel, rng: np.random.Generator, size=None):
    return model.sample(rng, size)


def laplace(model: SeverityModel, u):
    return model.laplace(u)


def laplace_oracle(model: SeverityModel, u: float) -> float:
    return model.laplace_oracle(u)


def from_params(name: str, **params) -> SeverityModel:
    """Build a severity from a family name and keyword parameters."""
    families = {"exponential": Exponential, "lognormal": LogNormal, "pareto": Pareto}
    try:
        cls = families[name.lower()]
    except KeyError:
        raise ValueError(f"unknown severity family {name!r}") from None
    return cls(**params)
