"""
Checking robustness without simulation
======================================

The verdict depends only on the tail exponent of the error density, the
number of outliers and how many moments the prior on sigma has.
"""

# %%
from contam import LogPareto, ScaledBetaTails
from contam.robustness import Gamma, InverseGamma, RobustnessQuery, ScaledBeta, check_robustness

queries = [
    (InverseGamma(2.0), ScaledBetaTails(3.0), 1),
    (InverseGamma(0.1), ScaledBetaTails(3.0), 1),
    (InverseGamma(1.5), ScaledBetaTails(3.0), 1),
    (InverseGamma(0.1), LogPareto(1.5), 1),
    (Gamma(1.0), ScaledBetaTails(7.0), 3),
    (ScaledBeta(1.0, 4.0), ScaledBetaTails(3.0), 2),
    (ScaledBeta(1.0, 1.0), ScaledBetaTails(3.0), 1),
]
for prior, err, n in queries:
    print(f"{prior!s:<36} {err!s:<28} |L|={n}  ->  {check_robustness(RobustnessQuery(prior, err, n))}")

# %%
# The shell version reads a config and signals the verdict through its exit
# status (0 robust, 2 non-robust, 3 inconclusive):
#
#     contam check --config src/contam/configs/contaminated_line_light_A0.1.json
