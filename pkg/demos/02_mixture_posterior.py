"""
The exact mixture posterior
===========================

With a normal-inverse-gamma prior, every split of the data into
"regression" and "outlier" observations gives a conjugate component, so
the posterior is a finite mixture with 2**n terms.
"""

# %%
import numpy as np

from contam import build_mixture_posterior, load_bundled, sample_posterior

cfg = load_bundled("contaminated_line.json")
data, prior, err = cfg.data(), cfg.nig_prior(), cfg.error_density()
print("y =", cfg.y, " outlier index (1-based):", cfg.outliers["indices"])

# %%
# As the fifth response grows, the weight moves to components that treat
# it as an outlier (bit 4 unset in the subset mask).
for omega in (1.0, 10.0, 1e3, 1e5):
    mix = build_mixture_posterior(data, omega, prior, cfg.s, err)
    top = int(np.argmax(mix.log_weights))
    share = np.exp(mix.log_weights[(mix.subsets & (1 << 4)) == 0]).sum()
    print(f"omega={omega:>7.0e}  top mask {int(mix.subsets[top]):05b}"
          f"  weight {np.exp(mix.log_weights[top]):.3f}  P(y5 outlier) {share:.6f}")

# %%
# Draws come from a component choice followed by a conjugate draw.
mix = build_mixture_posterior(data, 1e3, prior, cfg.s, err)
draws = sample_posterior(mix, 20_000, seed=1)
print("posterior mean of beta (exact):", mix.mean_beta().round(4))
print("posterior mean of beta (draws):", draws.beta.mean(axis=0).round(4))
