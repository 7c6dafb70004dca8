import math

import numpy as np
import pytest
from scipy import optimize

from caution import (
    Binary,
    BinaryNullBoundedSet,
    Gaussian,
    HypothesisConfig,
    PValuePair,
    ValidationError,
    blended_posterior,
    confidence_posterior_from_pvalue,
    confidence_posterior_normal,
    pair_lower_bound,
    self_benchmark_blend,
    sellke_lower_bound,
    two_pvalue_blend,
)
from caution.confidence import self_benchmark_projection

from oracles import binary_grid_argmin, binary_kl


def sellke_reference(p, pi):
    factor = math.e * p * math.log(1 / p)
    return min(1 / (1 + (1 - pi) / (pi * factor)), pi)


def test_confidence_posteriors():
    assert confidence_posterior_normal(2.5) == Gaussian(2.5, 1.0)
    assert confidence_posterior_from_pvalue(0.32) == Binary(0.32)
    assert confidence_posterior_from_pvalue(1.0) == Binary(1.0)
    with pytest.raises(ValidationError):
        confidence_posterior_from_pvalue(1.5)


def test_sellke_fixtures():
    assert math.e * 0.05 * math.log(20) == pytest.approx(0.40717, abs=1e-5)
    # f / (1 + f) with f = 0.4071628...; the commonly quoted 0.28936 rounds f first
    assert sellke_lower_bound(0.05, 0.5) == pytest.approx(0.2893499, abs=1e-7)
    assert sellke_lower_bound(0.05, 0.5) == pytest.approx(0.28936, abs=1.5e-5)
    assert sellke_lower_bound(0.05, 0.5) == pytest.approx(sellke_reference(0.05, 0.5), abs=1e-15)
    assert sellke_lower_bound(math.exp(-1), 0.5) == pytest.approx(0.5, abs=1e-15)
    assert sellke_lower_bound(1e-12, 0.5) < 1e-9
    with pytest.raises(ValidationError):
        sellke_lower_bound(0.0, 0.5)


def test_sellke_cap_above_one_over_e():
    for p in (0.4, 0.9, 1.0):
        assert sellke_lower_bound(p, 0.3) == pytest.approx(0.3, abs=1e-15)


def test_sellke_monotone():
    ps = np.arange(0.001, math.exp(-1), 1e-3)
    vals = [sellke_lower_bound(p, 0.5) for p in ps]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    pis = np.arange(0.001, 1.0, 1e-3)
    vals = [sellke_lower_bound(0.05, pi) for pi in pis]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_pair_bound():
    assert pair_lower_bound(PValuePair(0.05, 0.05), 0.5) == sellke_lower_bound(0.05, 0.5)
    assert pair_lower_bound(PValuePair(0.01, 0.05), 0.5) == sellke_lower_bound(0.05, 0.5)
    assert pair_lower_bound(PValuePair(0.01, 0.9), 0.5) == max(
        sellke_lower_bound(0.01, 0.5), sellke_lower_bound(0.9, 0.5)
    )
    with pytest.raises(ValidationError):
        PValuePair(0.3, 0.2)


def test_two_pvalue_with_inverted_prior_bound():
    pair = PValuePair(0.04, 0.2)
    # choose the prior bound so that the pair bound is exactly 0.1
    pi = optimize.brentq(lambda v: pair_lower_bound(pair, v) - 0.1, 1e-6, 0.999, xtol=1e-15)
    assert pair_lower_bound(pair, pi) == pytest.approx(0.1, abs=1e-12)
    res = two_pvalue_blend(pair, HypothesisConfig(pi, 0.5, 1.0))
    assert res.posterior.p0 == pytest.approx(0.2, abs=1e-12)


def two_pvalue_oracle(p1, p2, w, pi_low, kappa):
    lo, hi = kappa * pi_low + (1 - kappa) * w, kappa + (1 - kappa) * w
    qs = [binary_grid_argmin(p, lo, hi) for p in (p1, p2)]
    divs = [float(binary_kl(np.array([q]), p)[0]) for q, p in zip(qs, (p1, p2))]
    best = min(divs)
    tied = [i for i in (0, 1) if divs[i] <= best + 1e-9]
    if len(tied) == 1:
        return qs[tied[0]]
    closeness = [float(binary_kl(np.array([w]), qs[i])[0]) for i in tied]
    return qs[tied[int(np.argmin(closeness))]]


@pytest.mark.parametrize(
    "p1,p2,expected",
    [
        (0.05, 0.2, 0.3),  # both below the interval
        (0.1, 0.4, 0.4),  # p2 inside
        (0.35, 0.6, 0.6),  # both inside, tie broken toward the working posterior
        (0.4, 0.9, 0.4),  # p1 inside
        (0.8, 0.95, 0.75),  # both above
    ],
)
def test_two_pvalue_regimes(p1, p2, expected):
    res = two_pvalue_blend(PValuePair(p1, p2), HypothesisConfig(0.5, 0.5, 0.5), pi_low=0.1)
    assert res.posterior.p0 == pytest.approx(expected, abs=1e-12)
    assert res.posterior.p0 == pytest.approx(two_pvalue_oracle(p1, p2, 0.5, 0.1, 0.5), abs=2e-6)


def test_two_pvalue_extreme_regime_matches_oracle():
    res = two_pvalue_blend(PValuePair(0.1, 0.9), HypothesisConfig(0.5, 0.5, 0.5), pi_low=0.1)
    assert res.posterior.p0 == pytest.approx(two_pvalue_oracle(0.1, 0.9, 0.5, 0.1, 0.5), abs=2e-6)


def test_two_pvalue_full_caution_tie():
    res = two_pvalue_blend(PValuePair(0.2, 0.4), HypothesisConfig(0.5, 0.5, 1.0), pi_low=0.1)
    assert res.posterior.p0 == pytest.approx(0.4, abs=1e-12)
    assert res.candidate_count == 2


def test_two_pvalue_kappa_zero_is_working():
    res = two_pvalue_blend(PValuePair(0.01, 0.03), HypothesisConfig(0.5, 0.37, 0.0), pi_low=0.1)
    assert res.posterior == Binary(0.37)


def test_full_caution_ignores_working_outside_ties():
    pair = PValuePair(0.02, 0.05)
    outs = {two_pvalue_blend(pair, HypothesisConfig(0.5, w, 1.0), pi_low=0.25).posterior.p0 for w in (0.3, 0.5, 0.7)}
    assert len(outs) == 1


@pytest.mark.parametrize(
    "p,pi_low,kappa,expected",
    [(0.05, 0.2, 0.5, 0.125), (0.3, 0.2, 0.5, 0.3), (0.05, 0.2, 1.0, 0.2)],
)
def test_self_benchmark_fixtures(p, pi_low, kappa, expected):
    assert self_benchmark_blend(p, pi_low, kappa).p0 == pytest.approx(expected, abs=1e-15)
    lo = kappa * pi_low + (1 - kappa) * p
    hi = kappa + (1 - kappa) * p
    assert binary_grid_argmin(p, lo, hi) == pytest.approx(expected, abs=2e-6)


def test_self_benchmark_full_caution_matches_blend():
    post = self_benchmark_blend(0.05, 0.2, 1.0)
    assert post == blended_posterior(Binary(0.5), BinaryNullBoundedSet(0.2), [Binary(0.05)]).posterior


def test_self_benchmark_equivalence_and_bypass():
    rng = np.random.default_rng(8)
    for _ in range(500):
        p, pi_low, kappa = rng.uniform(0, 1), rng.uniform(0.01, 0.99), rng.uniform(0, 1)
        closed = self_benchmark_blend(p, pi_low, kappa).p0
        assert closed == pytest.approx(self_benchmark_projection(p, pi_low, kappa)[0].p0, abs=1e-12)
        if kappa < 1 and p < pi_low:
            assert closed < pi_low
