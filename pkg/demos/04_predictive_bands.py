"""
Predictive bands
================

Quantiles of the linear predictor and of a new response along the second
covariate, with the fifth response at 100.
"""

# %%
from contam import build_mixture_posterior, load_bundled, predictive_quantiles

for name in ("light_A0.1", "light_A2", "heavy_A2"):
    cfg = load_bundled(f"contaminated_line_{name}.json")
    mix = build_mixture_posterior(cfg.data(), 100.0, cfg.nig_prior(), cfg.s, cfg.error_density())
    print(name)
    for xt in cfg.xt_grid:
        q = predictive_quantiles(mix, xt, levels=cfg.quantile_levels,
                                 count=cfg.mc_samples, seed=cfg.seed)
        lo, med, hi = q.linpred
        plo, pmed, phi = q.predictive
        print(f"  x2={xt[1]:.1f}  linpred {med:6.2f} [{lo:7.2f}, {hi:7.2f}]"
              f"  new y {pmed:6.2f} [{plo:7.2f}, {phi:7.2f}]")

# %%
# With A = 0.1 the bands are an order of magnitude wider: the sigma prior
# lets the outlier inflate the scale. CSV output for plotting:
#
#     contam predict --config src/contam/configs/contaminated_line.json --out bands.csv
