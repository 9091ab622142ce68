"""Error densities, the normal-inverse-gamma prior and numeric bound checks.

Everything is evaluated in log space. The two outlier densities are

* scaled-beta tails: ``f(y) = (alpha/2) (1+|y|)^(-1-alpha)``
* log-Pareto:        ``f(y) = (gamma/2) (1+|y|)^(-1) {1+log(1+|y|)}^(-1-gamma)``

Both are symmetric and integrate to one over the real line.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

LOG_2PI = float(np.log(2.0 * np.pi))


class DomainError(ValueError):
    """Argument outside the domain of a density."""


def _finite(y):
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("density argument must be finite")
    return y


def _positive(name, value):
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value!r}")


def log_f1_light(y, alpha):
    """Log density of the double-sided scaled-beta error distribution."""
    _positive("alpha", alpha)
    y = _finite(y)
    return np.log(alpha / 2.0) - (1.0 + alpha) * np.log1p(np.abs(y))


def log_f1_heavy(y, gamma):
    """Log density of the unfolded log-Pareto error distribution."""
    _positive("gamma", gamma)
    y = _finite(y)
    l1 = np.log1p(np.abs(y))
    return np.log(gamma / 2.0) - l1 - (1.0 + gamma) * np.log1p(l1)


class TailParams(NamedTuple):
    alpha: float
    gamma: float


class ErrorDensity:
    """Parameter-free outlier density ``f1`` of the contamination model."""

    def logpdf(self, y):
        raise NotImplementedError

    def pdf(self, y):
        return np.exp(self.logpdf(y))

    @property
    def tail(self) -> TailParams:
        """Exponents ``(alpha, gamma)`` of the matching lower bound."""
        raise NotImplementedError

    def log_survival(self, t):
        """``log P(|Y| > t)`` for ``t >= 0``."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Inverse-cdf draws of ``|Y|`` with an independent random sign."""
        u = rng.random(size)
        sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return sign * self._abs_quantile_upper(u)

    def _abs_quantile_upper(self, u):
        raise NotImplementedError


@dataclass(frozen=True)
class ScaledBetaTails(ErrorDensity):
    """``(alpha/2)(1+|y|)^(-1-alpha)``; Student-t-like tails."""

    alpha: float

    def __post_init__(self):
        _positive("alpha", self.alpha)

    def logpdf(self, y):
        return log_f1_light(y, self.alpha)

    @property
    def tail(self):
        return TailParams(float(self.alpha), -1.0)

    def log_survival(self, t):
        return -self.alpha * np.log1p(np.asarray(t, dtype=float))

    def _abs_quantile_upper(self, u):
        # P(|Y| > t) = (1+t)^-alpha
        return np.expm1(-np.log(u) / self.alpha)


@dataclass(frozen=True)
class LogPareto(ErrorDensity):
    """``(gamma/2)(1+|y|)^-1 {1+log(1+|y|)}^(-1-gamma)``; log-regularly varying."""

    gamma: float

    def __post_init__(self):
        _positive("gamma", self.gamma)

    def logpdf(self, y):
        return log_f1_heavy(y, self.gamma)

    @property
    def tail(self):
        return TailParams(0.0, float(self.gamma))

    def log_survival(self, t):
        return -self.gamma * np.log1p(np.log1p(np.asarray(t, dtype=float)))

    def _abs_quantile_upper(self, u):
        # P(|Y| > t) = {1+log(1+t)}^-gamma; extreme draws overflow to inf
        with np.errstate(over="ignore"):
            return np.expm1(np.expm1(-np.log(u) / self.gamma))


def log_prior_nig(beta, sigma, A, B, C):
    """Log of the conjugate prior density in ``(beta, sigma)``.

    ``sigma**2`` is inverse-gamma(A, B) and ``beta | sigma ~ N(0, C^2 sigma^2 I)``.
    The density is with respect to ``sigma`` (not ``sigma**2``), so the
    ``2 sigma`` Jacobian is included.

    Parameters
    ----------
    beta : array_like, shape (..., p)
    sigma : array_like, shape (...)
    """
    beta = np.asarray(beta, dtype=float)
    if beta.ndim == 0:
        beta = beta[None]
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise DomainError("sigma must be positive")
    p = beta.shape[-1]
    log_sigma = np.log(sigma)
    log_scale_part = (
        np.log(2.0) + A * np.log(B) - gammaln(A)
        - (2.0 * A + 1.0) * log_sigma - B / sigma**2
    )
    sq = np.sum(beta**2, axis=-1)
    log_beta_part = (
        -0.5 * p * LOG_2PI - p * np.log(C) - p * log_sigma
        - sq / (2.0 * C**2 * sigma**2)
    )
    return log_scale_part + log_beta_part


def default_bound_grid(upper=1e6, points=10_000):
    """Symmetric grid, log-spaced in ``|y|`` over ``[0, upper]``."""
    half = points // 2
    pos = np.concatenate([[0.0], np.logspace(-6, np.log10(upper), half - 1)])
    return np.concatenate([-pos[:0:-1], pos])


class BoundCheck(NamedTuple):
    holds: bool
    worst_ratio: float


def check_error_lower_bound(f: ErrorDensity, alpha, gamma, Mprime, grid=None,
                            rtol=1e-12) -> BoundCheck:
    """Check ``f(y) >= (1/M') (1+|y|)^(-1-alpha) {1+log(1+|y|)}^(-1-gamma)``.

    Returns whether the bound holds at every grid point and the smallest
    value of ``f(y) / bound(y)``. A ratio within ``rtol`` of one counts as
    equality.
    """
    if alpha < 0 or gamma < -1 or not Mprime > 0:
        raise DomainError("need alpha >= 0, gamma >= -1 and M' > 0")
    grid = default_bound_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or not np.all(np.isfinite(grid)):
        raise DomainError("grid must be nonempty and finite")
    l1 = np.log1p(np.abs(grid))
    log_ratio = (f.logpdf(grid) + np.log(Mprime) + (1.0 + alpha) * l1
                 + (1.0 + gamma) * np.log1p(l1))
    worst = float(np.exp(np.min(log_ratio)))
    return BoundCheck(worst >= 1.0 - rtol, worst)


def prior_bound_sup_ratio(C, kappa, nu, grid=None, p=1):
    """Grid supremum of the normal conditional prior over the scaled-beta bound.

    By scale invariance the ratio ``pi(beta|sigma) / prod_k bound_k`` depends
    only on ``t = beta/sigma``. The coordinates factorise, so the p-variate
    supremum is the univariate one raised to the power ``p``. A finite value
    is the constant ``M`` of the prior bound.
    """
    if not (0 < kappa <= 1) or not nu > 0:
        raise DomainError("need 0 < kappa <= 1 and nu > 0")
    t = np.linspace(-50.0, 50.0, 20_001) if grid is None else np.asarray(grid, float)
    at = np.abs(t)
    log_ratio = -0.5 * LOG_2PI - np.log(C) - 0.5 * (t / C) ** 2 + (kappa + nu) * np.log1p(at)
    if kappa < 1:
        with np.errstate(divide="ignore"):
            log_ratio = log_ratio + (1.0 - kappa) * np.log(at)
    return float(np.exp(p * np.max(log_ratio)))


def model1_tail_ratio(y1, xb, sigma, alpha):
    """``f((y1 - xb)/sigma) / (sigma f(y1))`` for the scaled-beta density.

    Under a pure scale-location error model this per-outlier factor tends to
    ``sigma**alpha`` rather than one as ``y1`` grows.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    log_r = (log_f1_light((y1 - xb) / sigma, alpha) - np.log(sigma)
             - log_f1_light(y1, alpha))
    return float(np.exp(log_r))
