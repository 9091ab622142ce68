"""Decide posterior robustness from prior and error-density tail exponents.

Robust when ``E[sigma^(|L| alpha + rho)]`` is finite for some ``rho > 0``,
i.e. ``|L| alpha`` is strictly below the prior's moment threshold.
Non-robust when ``alpha > 0`` and the sigma prior has a polynomial tail
heavier than ``sigma^-(|L| alpha + 1)``; for the inverse-gamma and
scaled-beta families that reduces to ``|L| alpha`` strictly above the
threshold (derived from the tail exponents, not stated as such). Equality
is left undecided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .densities import ErrorDensity, prior_bound_sup_ratio


class Verdict(str, Enum):
    ROBUST = "Robust"
    NON_ROBUST = "NonRobust"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class InverseGamma:
    """``sigma^2 ~ IG(A, B)``; density of sigma ``~ sigma^-(2A+1) exp(-B/sigma^2)``."""

    A: float
    B: float = 1.0
    symbol = "2A"


@dataclass(frozen=True)
class Gamma:
    """``sigma^2 ~ Ga(C, D)``; density of sigma ``~ sigma^(2C-1) exp(-D sigma^2)``."""

    C: float
    D: float = 1.0
    symbol = None


@dataclass(frozen=True)
class ScaledBeta:
    """``sigma^2 ~ SB(E, F)``; density of sigma ``~ sigma^(2E-1) / (1+sigma^2)^(E+F)``."""

    E: float
    F: float
    symbol = "2F"


PriorFamily = InverseGamma | Gamma | ScaledBeta


def _check_positive(prior):
    for name, value in vars(prior).items():
        if not value > 0:
            raise ValueError(f"{type(prior).__name__}.{name} must be positive")


def moment_threshold(prior: PriorFamily) -> float:
    """``sup{m : E[sigma^m] < inf}`` for the prior on sigma."""
    _check_positive(prior)
    if isinstance(prior, InverseGamma):
        return 2.0 * prior.A
    if isinstance(prior, Gamma):
        return math.inf
    if isinstance(prior, ScaledBeta):
        return 2.0 * prior.F
    raise TypeError(f"unsupported prior family {type(prior).__name__}")


@dataclass(frozen=True)
class RobustnessQuery:
    prior: PriorFamily
    error: ErrorDensity
    n_outliers: int = 1
    nu: float | None = None      # prior-bound exponent; defaults to alpha + 1
    conditional_scale: float = 1.0  # C of beta | sigma ~ N(0, C^2 sigma^2 I)

    def __post_init__(self):
        if self.n_outliers < 1:
            raise ValueError("n_outliers must be at least 1")


@dataclass(frozen=True)
class RobustnessVerdict:
    verdict: Verdict
    condition: str
    nu: float
    prior_bound: float = field(default=math.nan)

    def __str__(self):
        return f"{self.verdict.value} ({self.condition})"


def check_robustness(q: RobustnessQuery) -> RobustnessVerdict:
    """Classify a prior/error pair as robust, non-robust or undecided."""
    alpha = q.error.tail.alpha
    threshold = moment_threshold(q.prior)
    nu = alpha + 1.0 if q.nu is None else float(q.nu)
    # finite sup ratio: the normal conditional prior meets the scaled-beta bound at this nu
    bound = prior_bound_sup_ratio(q.conditional_scale, 1.0, nu)
    load = q.n_outliers * alpha
    sym = q.prior.symbol

    if load < threshold and nu > alpha and math.isfinite(bound):
        cond = "✓" if sym is None else f"{sym} > |L|α"
        return RobustnessVerdict(Verdict.ROBUST, cond, nu, bound)
    if alpha > 0 and sym is not None and load > threshold:
        return RobustnessVerdict(Verdict.NON_ROBUST, f"{sym} < |L|α", nu, bound)
    if load == threshold:
        cond = f"{sym} = |L|α"
    elif not nu > alpha:
        cond = "ν ≤ α: prior bound exponent too small"
    else:
        cond = "neither condition applies"
    return RobustnessVerdict(Verdict.INCONCLUSIVE, cond, nu, bound)
