"""Normal mean with a single observation, moving from Bayes to confidence.

The working prior N(2, 1) disagrees with the datum x = 0.  As caution grows
the moderate posterior slides from the Bayes posterior toward N(0, 1), but
only as far as the plausible priors allow.
"""

import math

from caution import (
    GaussianConjugateSet,
    Quadratic,
    WorkingPrior,
    bayes_update_normal,
    confidence_posterior_normal,
    kcg_action_quadratic,
    moderate_action,
    moderate_posterior,
)

x = 0.0
prior = WorkingPrior(mu_dot=2.0, sigma_dot=1.0)
working = bayes_update_normal(prior, x)
benchmark = confidence_posterior_normal(x)
print(f"working posterior  N({working.mean:.4f}, {working.variance:.4f})")
print(f"benchmark          N({benchmark.mean:.4f}, {benchmark.variance:.4f})")

bounded = GaussianConjugateSet(x, mu_lo=0.5, mu_hi=3.0, sigma_lo=0.5, sigma_hi=2.0)
unbounded = GaussianConjugateSet(x)

for label, base in (("prior means in [0.5, 3]", bounded), ("no bounds", unbounded)):
    print()
    print(label)
    print(" kappa   post.mean   post.var    divergence   flag")
    for kappa in (0.0, 0.25, 0.5, 0.75, 1.0):
        res = moderate_posterior(working, base, [benchmark], kappa)
        act = moderate_action(res.posterior, Quadratic())
        print(
            f" {kappa:4.2f}  {act.action:10.5f}  {act.objective:9.5f}  "
            f"{res.achieved_divergence.value:11.3e}   {res.boundary_flag.value}"
        )

# with unbounded prior means the worst case risk is infinite, so the
# conditional Gamma-minimax estimate does not exist for any kappa > 0
for kappa in (0.0, 0.5):
    res = kcg_action_quadratic(unbounded, working, kappa)
    shown = "none" if res.action is None else f"{res.action:.4f}"
    print(f"kCG estimate at kappa={kappa}: {shown} ({res.existence.value})")

res = kcg_action_quadratic(bounded, working, 0.5)
print(f"kCG estimate with bounded means: {res.action:.4f}, worst risk {res.objective:.4f}")
assert math.isfinite(res.objective)
