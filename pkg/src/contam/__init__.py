"""Robust Bayesian regression under the contamination model.

Exact normal-inverse-gamma mixture posteriors, Monte Carlo KL divergence
between full-data and outlier-free posteriors, a quadrature oracle and a
robustness verdict engine.
"""

from .config import ConfigError, ExperimentConfig, load_bundled
from .conjugate import (
    MixturePosterior,
    NIGParams,
    RegressionData,
    build_mixture_posterior,
    log_marginal_likelihood,
    log_posterior_density,
    materialize_outliers,
    nig_update,
    predictive_quantiles,
    sample_posterior,
)
from .densities import (
    ErrorDensity,
    LogPareto,
    ScaledBetaTails,
    check_error_lower_bound,
    log_f1_heavy,
    log_f1_light,
    log_prior_nig,
    model1_tail_ratio,
    prior_bound_sup_ratio,
)
from .divergence import KLEstimate, kl_mc, kl_sweep
from .robustness import (
    Gamma,
    InverseGamma,
    RobustnessQuery,
    ScaledBeta,
    Verdict,
    check_robustness,
    moment_threshold,
)

__version__ = "0.1.0"
