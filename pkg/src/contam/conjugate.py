"""Exact mixture posterior of the contamination regression model.

With a normal-inverse-gamma prior the likelihood
``prod_i [(1-s) N(y_i | x_i'beta, sigma^2) + s f1(y_i)]`` expands over the
``2^n`` ways of assigning observations to the regression component. Each
term is conjugate, so the posterior is a finite mixture of NIG densities
whose weights are marginal likelihoods.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import gammaln, logsumexp

from .densities import LOG_2PI, DomainError, ErrorDensity

MAX_ENUMERATED = 20


class SubsetLimitError(ValueError):
    """Too many observations for exhaustive subset enumeration."""


@dataclass(frozen=True)
class RegressionData:
    """Responses, design matrix and the outlier schedule ``y_i = a_i + b_i omega``.

    ``outliers`` holds zero-based indices; ``a`` and ``b`` are aligned with it.
    Entries of ``y`` at outlier positions are placeholders.
    """

    y: np.ndarray
    X: np.ndarray
    outliers: tuple = ()
    a: np.ndarray = field(default_factory=lambda: np.zeros(0))
    b: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).reshape(-1)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        outliers = tuple(int(i) for i in self.outliers)
        a = np.asarray(self.a, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        n = y.size
        if X.shape[0] != n:
            raise ValueError(f"X has {X.shape[0]} rows but y has {n} entries")
        if len(set(outliers)) != len(outliers) or any(not 0 <= i < n for i in outliers):
            raise ValueError("outlier indices must be distinct and within range")
        if a.size != len(outliers) or b.size != len(outliers):
            raise ValueError("a and b must align with the outlier indices")
        if np.any(b == 0):
            raise ValueError("outlier slopes b_i must be nonzero")
        sv = np.linalg.svd(X, compute_uv=False)
        if sv.size < X.shape[1] or sv[-1] <= 1e-10 * sv[0]:
            raise ValueError("X must have full column rank")
        for name, value in (("y", y), ("X", X), ("outliers", outliers), ("a", a), ("b", b)):
            object.__setattr__(self, name, value)

    @property
    def n(self):
        return self.y.size

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def clean(self):
        """Indices of the non-outlying observations."""
        out = set(self.outliers)
        return tuple(i for i in range(self.n) if i not in out)


def materialize_outliers(data: RegressionData, omega) -> np.ndarray:
    """Responses with ``y_i = a_i + b_i omega`` substituted on the outlier set."""
    if not omega > 0:
        raise DomainError("omega must be positive")
    y = data.y.copy()
    idx = list(data.outliers)
    y[idx] = data.a + data.b * omega
    return y


@dataclass(frozen=True, eq=False)
class NIGParams:
    """Normal-inverse-gamma parameters.

    ``beta | sigma ~ N(mu, sigma^2 Lambda^-1)`` and
    ``sigma^2 ~ InvGamma(shape, scale)``.
    """

    mu: np.ndarray
    Lambda: np.ndarray
    shape: float
    scale: float

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        Lam = np.atleast_2d(np.asarray(self.Lambda, dtype=float))
        if Lam.shape != (mu.size, mu.size):
            raise ValueError("Lambda must be p x p")
        if not np.allclose(Lam, Lam.T, rtol=1e-12, atol=0):
            raise ValueError("Lambda must be symmetric")
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("shape and scale must be positive")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "Lambda", Lam)
        object.__setattr__(self, "shape", float(self.shape))
        object.__setattr__(self, "scale", float(self.scale))
        self.chol  # raises on a non-SPD precision

    @classmethod
    def prior(cls, A, B, C, p):
        """Hyperparameters ``(A, B, C)``: ``mu = 0``, ``Lambda = I / C^2``."""
        return cls(np.zeros(p), np.eye(p) / C**2, A, B)

    @property
    def p(self):
        return self.mu.size

    @cached_property
    def chol(self):
        """Lower Cholesky factor of ``Lambda``."""
        L = np.linalg.cholesky(self.Lambda)
        d = np.diag(L)
        if d.size and d.min() <= 1e-12 * max(d.max(), 1.0):
            raise np.linalg.LinAlgError("precision matrix is numerically singular")
        return L

    @cached_property
    def logdet(self):
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    def logpdf(self, beta, sigma):
        """Log density in ``(beta, sigma)``; broadcasting over leading axes."""
        beta = np.asarray(beta, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        p = self.p
        diff = beta - self.mu
        # ||L' diff||^2 = diff' Lambda diff
        quad = np.sum((diff @ self.chol) ** 2, axis=-1)
        log_sigma = np.log(sigma)
        log_normal = -0.5 * p * LOG_2PI + 0.5 * self.logdet - p * log_sigma - 0.5 * quad / sigma**2
        log_scale = (np.log(2.0) + self.shape * np.log(self.scale) - gammaln(self.shape)
                     - (2.0 * self.shape + 1.0) * log_sigma - self.scale / sigma**2)
        return log_normal + log_scale

    def __eq__(self, other):
        if not isinstance(other, NIGParams):
            return NotImplemented
        return (np.array_equal(self.mu, other.mu) and np.array_equal(self.Lambda, other.Lambda)
                and self.shape == other.shape and self.scale == other.scale)

    __hash__ = None


def nig_update(prior: NIGParams, Xs, ys) -> NIGParams:
    """Conjugate update of ``prior`` with Gaussian observations ``(Xs, ys)``."""
    ys = np.asarray(ys, dtype=float).reshape(-1)
    m = ys.size
    if m == 0:
        return prior
    Xs = np.asarray(Xs, dtype=float).reshape(m, prior.p)
    Lam = prior.Lambda + Xs.T @ Xs
    Lam = 0.5 * (Lam + Lam.T)
    L = np.linalg.cholesky(Lam)
    eta = prior.Lambda @ prior.mu + Xs.T @ ys
    mu = cho_solve((L, True), eta)
    # mu' Lambda' mu = ||L^-1 eta||^2
    z = solve_triangular(L, eta, lower=True)
    prior_quad = float(np.sum((prior.mu @ prior.chol) ** 2))
    resid = float(ys @ ys) + prior_quad - float(z @ z)
    scale = prior.scale + 0.5 * max(resid, 0.0)
    return NIGParams(mu, Lam, prior.shape + 0.5 * m, scale)


def _log_marginal(prior: NIGParams, post: NIGParams, m):
    return (-0.5 * m * LOG_2PI + 0.5 * (prior.logdet - post.logdet)
            + prior.shape * np.log(prior.scale) - post.shape * np.log(post.scale)
            + gammaln(post.shape) - gammaln(prior.shape))


def log_marginal_likelihood(prior: NIGParams, Xs, ys) -> float:
    """``log int prod_i N(ys_i | xs_i'beta, sigma^2) dPi(beta, sigma)``."""
    ys = np.asarray(ys, dtype=float).reshape(-1)
    if ys.size == 0:
        return 0.0
    post = nig_update(prior, Xs, ys)
    return float(_log_marginal(prior, post, ys.size))


@dataclass(frozen=True, eq=False)
class MixturePosterior:
    """Normalised NIG mixture, one component per regression-assigned subset.

    ``subsets[k]`` is a bitmask over the original observation indices (bit
    ``i`` set when observation ``i`` is assigned to the normal component).
    ``raw_log_weights`` are the unnormalised log weights; their log-sum-exp
    is ``log_evidence``. ``y``, ``X``, ``active`` and ``prior`` record what
    the mixture was built from.
    """

    subsets: np.ndarray
    log_weights: np.ndarray
    params: tuple
    s: float
    error: ErrorDensity
    raw_log_weights: np.ndarray
    log_evidence: float
    y: np.ndarray
    X: np.ndarray
    active: tuple
    prior: NIGParams

    @property
    def p(self):
        return self.X.shape[1]

    def __len__(self):
        return len(self.params)

    @cached_property
    def _stacked(self):
        mus = np.stack([c.mu for c in self.params])
        chols = np.stack([c.chol for c in self.params])
        shapes = np.array([c.shape for c in self.params])
        scales = np.array([c.scale for c in self.params])
        logdets = np.array([c.logdet for c in self.params])
        const = (self.log_weights - 0.5 * self.p * LOG_2PI + 0.5 * logdets + np.log(2.0)
                 + shapes * np.log(scales) - gammaln(shapes))
        return mus, chols, shapes, scales, const

    def component_logpdf(self, beta, sigma):
        """Weighted component log densities, shape ``(..., K)``."""
        beta = np.asarray(beta, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        if np.any(sigma <= 0):
            raise DomainError("sigma must be positive")
        if beta.ndim == 0:
            beta = beta[None]
        mus, chols, shapes, scales, const = self._stacked
        diff = beta[..., None, :] - mus                          # (..., K, p)
        proj = np.einsum("...kp,kpq->...kq", diff, chols)
        quad = np.sum(proj**2, axis=-1)                          # (..., K)
        log_sigma = np.log(sigma)[..., None]
        inv_s2 = 1.0 / sigma[..., None] ** 2
        return (const - (self.p + 2.0 * shapes + 1.0) * log_sigma
                - (0.5 * quad + scales) * inv_s2)

    def mean_beta(self):
        """Analytic posterior mean of beta."""
        w = np.exp(self.log_weights)
        return w @ np.stack([c.mu for c in self.params])



def build_mixture_posterior(data: RegressionData, omega, prior: NIGParams, s,
                            err: ErrorDensity, restrict_to: Sequence[int] | None = None
                            ) -> MixturePosterior:
    """Enumerate the ``2^n`` components of the posterior.

    Parameters
    ----------
    data, omega
        Observations; outliers are placed at ``a + b * omega``.
    prior
        NIG prior, usually ``NIGParams.prior(A, B, C, p)``.
    s
        Prior contamination probability.
    err
        Outlier density ``f1``.
    restrict_to
        If given, only these observations enter the likelihood; used for the
        posterior given the non-outliers.
    """
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    active = tuple(sorted(range(data.n) if restrict_to is None else set(restrict_to)))
    if len(active) > MAX_ENUMERATED:
        raise SubsetLimitError(
            f"{len(active)} active observations exceed the enumeration cap of "
            f"{MAX_ENUMERATED}; subsample the data")
    y = materialize_outliers(data, omega)
    X = data.X
    log_f1 = {i: float(err.logpdf(y[i])) for i in active}
    log_s, log_1ms = np.log(s), np.log1p(-s)
    n_act = len(active)

    masks, raw, params = [], [], []
    # bitmask order over the active positions keeps the reduction deterministic
    for code in range(1 << n_act):
        S = [active[j] for j in range(n_act) if code >> j & 1]
        rest = [active[j] for j in range(n_act) if not code >> j & 1]
        post = nig_update(prior, X[S], y[S])
        lw = (len(S) * log_1ms + len(rest) * log_s + sum(log_f1[i] for i in rest)
              + (_log_marginal(prior, post, len(S)) if S else 0.0))
        masks.append(sum(1 << i for i in S))
        raw.append(lw)
        params.append(post)

    raw = np.array(raw)
    log_z = float(logsumexp(raw))
    return MixturePosterior(
        subsets=np.array(masks, dtype=np.int64),
        log_weights=raw - log_z,
        params=tuple(params),
        s=float(s),
        error=err,
        raw_log_weights=raw,
        log_evidence=log_z,
        y=y,
        X=X,
        active=active,
        prior=prior,
    )


def log_posterior_density(mix: MixturePosterior, beta, sigma):
    """Log posterior density in ``(beta, sigma)`` (Jacobian included)."""
    return logsumexp(mix.component_logpdf(beta, sigma), axis=-1)


class PosteriorDraws(NamedTuple):
    beta: np.ndarray
    sigma: np.ndarray
    component: np.ndarray


def sample_posterior(mix: MixturePosterior, count, seed) -> PosteriorDraws:
    """I.i.d. draws from the mixture; deterministic for a fixed seed.

    A component is chosen by weight, the precision ``1/sigma^2`` is drawn
    from ``Gamma(shape, rate=scale)``, then ``beta ~ N(mu, sigma^2 Lambda^-1)``.
    """
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    w = np.exp(mix.log_weights)
    comp = rng.choice(len(mix), size=count, p=w / w.sum())
    mus, chols, shapes, scales, _ = mix._stacked
    tau = rng.gamma(shapes[comp], 1.0 / scales[comp])
    sigma = tau ** -0.5
    z = rng.standard_normal((count, mix.p))
    beta = np.empty((count, mix.p))
    for k in np.unique(comp):
        sel = comp == k
        # L' u = z gives u ~ N(0, Lambda^-1)
        u = solve_triangular(chols[k], z[sel].T, lower=True, trans="T").T
        beta[sel] = mus[k] + sigma[sel, None] * u
    return PosteriorDraws(beta, sigma, comp)


DEFAULT_LEVELS = (0.025, 0.5, 0.975)


class PredictiveQuantiles(NamedTuple):
    levels: np.ndarray
    linpred: np.ndarray
    predictive: np.ndarray


def predictive_quantiles(mix: MixturePosterior, xt, s=None, err: ErrorDensity | None = None,
                         levels=DEFAULT_LEVELS, count=1000, seed=0) -> PredictiveQuantiles:
    """Quantiles of ``xt'beta`` and of a new response at ``xt``.

    The new response is drawn from ``(1-s) N(xt'beta, sigma^2) + s f1``.
    ``s`` and ``err`` default to those of the mixture.
    """
    levels = np.asarray(levels, dtype=float)
    if np.any((levels <= 0) | (levels >= 1)):
        raise ValueError("levels must lie in (0, 1)")
    s = mix.s if s is None else s
    err = mix.error if err is None else err
    xt = np.asarray(xt, dtype=float).reshape(-1)
    draws = sample_posterior(mix, count, seed)
    lin = draws.beta @ xt
    rng = np.random.default_rng([seed, 1])
    outlying = rng.random(count) < s
    y_new = lin + draws.sigma * rng.standard_normal(count)
    y_new[outlying] = err.sample(rng, int(outlying.sum()))
    return PredictiveQuantiles(levels, np.quantile(lin, levels), np.quantile(y_new, levels))
