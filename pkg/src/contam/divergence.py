"""Monte Carlo KL divergence between clean-data and full-data posteriors."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .conjugate import (
    MixturePosterior,
    NIGParams,
    RegressionData,
    build_mixture_posterior,
    log_posterior_density,
    sample_posterior,
)
from .densities import LOG_2PI, ErrorDensity

DEFAULT_COUNT = 1000


class KLEstimationError(ArithmeticError):
    """A draw produced a non-finite log-ratio."""

    def __init__(self, message, beta=None, sigma=None):
        super().__init__(message)
        self.beta = beta
        self.sigma = sigma


@dataclass(frozen=True)
class KLEstimate:
    """Raw Monte Carlo mean of the log-ratio, its standard error and sample size."""

    value: float
    std_error: float
    count: int


def _nested_outliers(p_clean: MixturePosterior, p_full: MixturePosterior):
    """Indices the full model adds, or None if ``p_clean`` is not its restriction."""
    if not set(p_clean.active) <= set(p_full.active):
        return None
    if (p_clean.s != p_full.s or p_clean.error != p_full.error
            or p_clean.prior != p_full.prior or p_clean.p != p_full.p):
        return None
    act = list(p_clean.active)
    if not (np.array_equal(p_clean.y[act], p_full.y[act])
            and np.array_equal(p_clean.X[act], p_full.X[act])):
        return None
    return [i for i in p_full.active if i not in set(p_clean.active)]


def log_density_ratio(p_clean: MixturePosterior, p_full: MixturePosterior, beta, sigma):
    """``log p_clean(beta, sigma) - log p_full(beta, sigma)``.

    When ``p_clean`` is ``p_full`` restricted to a subset of observations the
    ratio is evaluated without cancellation: with ``c_i`` the odds that extra
    observation ``i`` came from the regression component,

        log ratio = log(Z_full / (Z_clean prod s f1(y_i))) - sum_i log1p(c_i),

    and the first term is ``log1p`` of the weight share of components that
    use an extra observation. This keeps ratios of order 1e-20 accurate,
    which a difference of two log-sum-exps cannot.
    """
    extra = _nested_outliers(p_clean, p_full)
    if extra is None:
        return log_posterior_density(p_clean, beta, sigma) - log_posterior_density(p_full, beta, sigma)
    beta = np.asarray(beta, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if not extra:
        return np.zeros(np.broadcast_shapes(beta.shape[:-1], sigma.shape))
    extra_mask = sum(1 << i for i in extra)
    uses_extra = (p_full.subsets & extra_mask) != 0
    log_num = logsumexp(p_full.raw_log_weights[uses_extra])
    log_den = logsumexp(p_full.raw_log_weights[~uses_extra])
    offset = np.log1p(np.exp(log_num - log_den))

    s = p_full.s
    log_odds = np.log1p(-s) - np.log(s)
    total = 0.0
    for i in extra:
        yi = p_full.y[i]
        mean = beta @ p_full.X[i]
        log_norm = -0.5 * LOG_2PI - np.log(sigma) - 0.5 * ((yi - mean) / sigma) ** 2
        log_c = log_odds + log_norm - p_full.error.logpdf(yi)
        total = total + np.logaddexp(0.0, log_c)
    return offset - total


def kl_mc(p_clean: MixturePosterior, p_full: MixturePosterior, count=DEFAULT_COUNT,
          seed=0) -> KLEstimate:
    """Estimate ``KL(p_clean || p_full)`` from draws of ``p_clean``.

    The raw mean is reported without clamping at zero.
    """
    if p_clean.p != p_full.p:
        raise ValueError("posteriors have different dimensions")
    if count < 2:
        raise ValueError("count must be at least 2")
    draws = sample_posterior(p_clean, count, seed)
    r = np.asarray(log_density_ratio(p_clean, p_full, draws.beta, draws.sigma))
    bad = ~np.isfinite(r)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise KLEstimationError(
            f"non-finite log-ratio at draw {k}: beta={draws.beta[k]}, sigma={draws.sigma[k]}",
            draws.beta[k], draws.sigma[k])
    return KLEstimate(float(r.mean()), float(r.std(ddof=1) / np.sqrt(count)), count)


@dataclass(frozen=True)
class SweepRow:
    omega: float
    estimate: KLEstimate | None
    error: str | None = None


def row_seed(seed, index):
    """Seed for sweep row ``index``; independent of execution order."""
    return np.random.SeedSequence(seed, spawn_key=(index,))


def _threads():
    try:
        return max(1, int(os.environ.get("CONTAM_THREADS", "1")))
    except ValueError:
        return 1


def kl_sweep(data: RegressionData, prior: NIGParams, s, err: ErrorDensity, omegas,
             count=DEFAULT_COUNT, seed=0) -> list[SweepRow]:
    """KL between the clean-data and full-data posteriors along an omega grid.

    Rows come back in the order of ``omegas``. A failing row records its
    error instead of aborting the sweep. ``CONTAM_THREADS`` caps the number
    of rows evaluated concurrently.
    """
    omegas = [float(w) for w in omegas]
    if not omegas:
        raise ValueError("omegas must be nonempty")
    if any(b <= a for a, b in zip(omegas, omegas[1:])):
        raise ValueError("omegas must be increasing")
    # the clean posterior does not depend on omega
    p_clean = build_mixture_posterior(data, omegas[0], prior, s, err, restrict_to=data.clean)

    def run(item):
        k, omega = item
        try:
            p_full = build_mixture_posterior(data, omega, prior, s, err)
            return SweepRow(omega, kl_mc(p_clean, p_full, count, row_seed(seed, k)))
        except (KLEstimationError, FloatingPointError, np.linalg.LinAlgError) as exc:
            return SweepRow(omega, None, str(exc))

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(run, enumerate(omegas)))
