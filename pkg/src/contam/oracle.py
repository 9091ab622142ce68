"""Brute-force trapezoid quadrature over ``(beta, sigma)`` for ``p <= 2``.

Used to validate the closed-form mixture posterior and to follow the
normalising integral of the outlier terms as ``omega`` grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import logsumexp

from .conjugate import NIGParams, RegressionData, materialize_outliers
from .densities import LOG_2PI, ErrorDensity, log_prior_nig

LogKernel = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid for ``(beta, sigma)``.

    With ``beta_scaled`` the beta axes are in units of ``beta / sigma`` and
    the ``sigma^p`` Jacobian is applied; this follows mass that drifts to
    large ``sigma``, where beta spreads in proportion.
    """

    beta_range: tuple
    beta_points: int
    sigma_range: tuple
    sigma_points: int
    sigma_spacing: str = "logarithmic"
    beta_scaled: bool = False

    def __post_init__(self):
        ranges = [tuple(map(float, r)) for r in self.beta_range]
        object.__setattr__(self, "beta_range", tuple(ranges))
        if not 1 <= len(ranges) <= 2:
            raise ValueError("quadrature oracle supports p <= 2 only")
        if self.beta_points < 16 or self.sigma_points < 16:
            raise ValueError("need at least 16 points per axis")
        if not 0 < self.sigma_range[0] < self.sigma_range[1]:
            raise ValueError("sigma range must be positive and increasing")
        if self.sigma_spacing not in ("linear", "logarithmic"):
            raise ValueError("sigma_spacing is 'linear' or 'logarithmic'")

    @property
    def p(self):
        return len(self.beta_range)

    def refined(self, factor=2):
        """Same box with ``factor`` times the points per axis."""
        return GridSpec(self.beta_range, factor * self.beta_points, self.sigma_range,
                        factor * self.sigma_points, self.sigma_spacing, self.beta_scaled)


def _trapezoid_weights(x):
    w = np.zeros_like(x)
    d = np.diff(x)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


class Mesh(NamedTuple):
    beta: np.ndarray       # (..., p)
    sigma: np.ndarray      # (...)
    log_weight: np.ndarray  # (...)
    boundary: np.ndarray   # bool (...)


def make_mesh(grid: GridSpec) -> Mesh:
    axes, log_w = [], []
    for lo, hi in grid.beta_range:
        b = np.linspace(lo, hi, grid.beta_points)
        axes.append(b)
        log_w.append(np.log(_trapezoid_weights(b)))
    lo, hi = grid.sigma_range
    if grid.sigma_spacing == "logarithmic":
        u = np.linspace(np.log(lo), np.log(hi), grid.sigma_points)
        sig = np.exp(u)
        log_ws = np.log(_trapezoid_weights(u)) + u
    else:
        sig = np.linspace(lo, hi, grid.sigma_points)
        log_ws = np.log(_trapezoid_weights(sig))
    mesh = np.meshgrid(*axes, sig, indexing="ij")
    wmesh = np.meshgrid(*log_w, log_ws, indexing="ij")
    sigma = mesh[-1]
    beta = np.stack(mesh[:-1], axis=-1)
    log_weight = sum(wmesh)
    if grid.beta_scaled:
        beta = beta * sigma[..., None]
        log_weight = log_weight + grid.p * np.log(sigma)
    boundary = np.zeros(sigma.shape, dtype=bool)
    for ax in range(sigma.ndim):
        idx = [slice(None)] * sigma.ndim
        for end in (0, -1):
            idx[ax] = end
            boundary[tuple(idx)] = True
    return Mesh(beta, sigma, log_weight, boundary)


def _evaluate(fn: LogKernel, mesh: Mesh) -> np.ndarray:
    # one sigma slice at a time bounds memory for mixture kernels
    out = np.empty(mesh.sigma.shape)
    for j in range(mesh.sigma.shape[-1]):
        out[..., j] = fn(mesh.beta[..., j, :], mesh.sigma[..., j])
    return out


class QuadratureResult(NamedTuple):
    log_integral: float
    coarse: bool  # mass reaches the grid boundary


def quadrature_normalizer(kernel: LogKernel, grid: GridSpec, boundary_tol=1e-6
                          ) -> QuadratureResult:
    """Log of the trapezoid integral of ``exp(kernel)`` over the grid.

    ``coarse`` is set when the integrand on the boundary comes within
    ``boundary_tol`` of its interior maximum, i.e. the box may not bracket
    the mass.
    """
    mesh = make_mesh(grid)
    lv = _evaluate(kernel, mesh)
    log_int = float(logsumexp(lv + mesh.log_weight))
    inner = lv[~mesh.boundary]
    coarse = bool(np.max(lv[mesh.boundary]) >= np.max(inner) + np.log(boundary_tol))
    return QuadratureResult(log_int, coarse)


def quadrature_kl(log_p: LogKernel, log_q: LogKernel, grid: GridSpec) -> float:
    """``int p (log p - log q)`` by trapezoid; both densities normalised."""
    mesh = make_mesh(grid)
    lp = _evaluate(log_p, mesh)
    lq = _evaluate(log_q, mesh)
    integrand = np.exp(lp + mesh.log_weight) * (lp - lq)
    integrand[np.isneginf(lp)] = 0.0
    return float(np.sum(integrand))


def posterior_kernel(y, X, prior_hyper, s, err: ErrorDensity, active=None) -> LogKernel:
    """Unnormalised log of prior times contamination likelihood.

    ``prior_hyper`` is ``(A, B, C)``; evaluated observation by observation,
    independent of the subset expansion.
    """
    A, B, C = prior_hyper
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    idx = range(y.size) if active is None else active
    log_s, log_1ms = np.log(s), np.log1p(-s)

    def kernel(beta, sigma):
        out = log_prior_nig(beta, sigma, A, B, C)
        for i in idx:
            mean = beta @ X[i]
            log_norm = -0.5 * LOG_2PI - np.log(sigma) - 0.5 * ((y[i] - mean) / sigma) ** 2
            out = out + np.logaddexp(log_1ms + log_norm, log_s + err.logpdf(y[i]))
        return out

    return kernel


def normalizer_growth(data: RegressionData, prior: NIGParams, s, err: ErrorDensity, omegas,
                      grid: GridSpec | None = None, points=(121, 241)):
    """Log normaliser of the outlier-only kernel along an omega grid.

    For each omega integrates
    ``pi(beta, sigma) prod_{i in L} (1-s)/s N(y_i | x_i'beta, sigma^2) / f1(y_i)``.
    The default grid is in ``beta / sigma`` units (+-10 prior sds) with a
    log-spaced sigma axis on ``[1e-2, 10 omega]``. Returns
    ``[(omega, log_integral), ...]``.
    """
    if prior.p > 2:
        raise ValueError("quadrature oracle supports p <= 2 only")
    if not np.allclose(prior.mu, 0) or not np.allclose(prior.Lambda, np.diag(np.diag(prior.Lambda))):
        raise ValueError("oracle kernel needs the isotropic zero-mean prior")
    C = float(prior.Lambda[0, 0] ** -0.5)
    A, B = prior.shape, prior.scale
    log_odds = np.log1p(-s) - np.log(s)
    out = []
    for omega in omegas:
        y = materialize_outliers(data, omega)
        g = grid or GridSpec(((-10 * C, 10 * C),) * prior.p, points[0],
                             (1e-2, 10.0 * omega), points[1], beta_scaled=True)
        log_f1 = {i: float(err.logpdf(y[i])) for i in data.outliers}

        def kernel(beta, sigma, y=y, log_f1=log_f1):
            val = log_prior_nig(beta, sigma, A, B, C)
            for i in data.outliers:
                mean = beta @ data.X[i]
                log_norm = -0.5 * LOG_2PI - np.log(sigma) - 0.5 * ((y[i] - mean) / sigma) ** 2
                val = val + log_odds + log_norm - log_f1[i]
            return val

        out.append((float(omega), quadrature_normalizer(kernel, g).log_integral))
    return out


def default_grid(data: RegressionData, prior_hyper, beta_points=161, sigma_points=161,
                 sigma_range=(1e-2, 1e2)) -> GridSpec:
    """Beta box centred at the clean least-squares fit, +-10 prior-predictive sds."""
    A, B, C = prior_hyper
    clean = list(data.clean)
    center, *_ = np.linalg.lstsq(data.X[clean], data.y[clean], rcond=None)
    sd = np.sqrt(B / max(A - 1.0, 0.5)) * C + np.std(data.y[clean])
    return GridSpec(tuple((c - 10 * sd, c + 10 * sd) for c in center), beta_points,
                    sigma_range, sigma_points)
