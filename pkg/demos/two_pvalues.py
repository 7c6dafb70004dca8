"""Null hypothesis probability from a one-sided and a two-sided p-value.

A lower bound on the posterior null probability comes from the
e * p * log(1/p) calibration.  Each p-value is a binary benchmark and the
moderate posterior picks whichever projects closest.
"""

from caution import HypothesisConfig, PValuePair, pair_lower_bound, sellke_lower_bound, two_pvalue_blend

pi_prior_low = 0.5
for p in (0.001, 0.01, 0.05, 0.2, 0.5):
    print(f"p = {p:<6} lower bound on P(null | x) = {sellke_lower_bound(p, pi_prior_low):.4f}")

pair = PValuePair(p1=0.02, p2=0.04)
print(f"\npair {pair.p1}, {pair.p2}: bound {pair_lower_bound(pair, pi_prior_low):.4f}")
print(" kappa  null mass  benchmark  candidates")
for kappa in (0.0, 0.25, 0.5, 0.75, 1.0):
    res = two_pvalue_blend(pair, HypothesisConfig(pi_prior_low, working_null_prob=0.5, kappa=kappa))
    print(f" {kappa:4.2f}  {res.posterior.p0:9.4f}  {res.selected_benchmark + 1:9d}  {res.candidate_count:10d}")

# when both p-values are plausible at full caution the working posterior breaks the tie
res = two_pvalue_blend(PValuePair(0.2, 0.4), HypothesisConfig(0.5, 0.5, 1.0), pi_low=0.1)
print(f"\ntie between 0.2 and 0.4 resolved to {res.posterior.p0}")
