"""Confidence posteriors used as benchmarks, and p-value based analyses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .distributions import Binary, Gaussian
from .errors import ValidationError
from .posterior_sets import BinaryNullBoundedSet, check_kappa, contract
from .projection import BenchmarkSet, BlendResult, moderate_posterior, project_binary

__all__ = [
    "PValuePair",
    "HypothesisConfig",
    "confidence_posterior_normal",
    "confidence_posterior_from_pvalue",
    "sellke_lower_bound",
    "pair_lower_bound",
    "two_pvalue_blend",
    "self_benchmark_blend",
]


@dataclass(frozen=True)
class PValuePair:
    """One-sided p-value ``p1`` and the (weaker-assumption) two-sided ``p2``."""

    p1: float
    p2: float

    def __post_init__(self):
        if not 0.0 < self.p1 <= self.p2 <= 1.0:
            raise ValidationError(f"need 0 < p1 <= p2 <= 1, got p1={self.p1!r}, p2={self.p2!r}")


@dataclass(frozen=True)
class HypothesisConfig:
    pi_prior_low: float
    working_null_prob: float
    kappa: float

    def __post_init__(self):
        if not 0.0 < self.pi_prior_low < 1.0:
            raise ValidationError(f"pi_prior_low must lie in (0, 1), got {self.pi_prior_low!r}")
        if not 0.0 < self.working_null_prob < 1.0:
            raise ValidationError(f"working_null_prob must lie in (0, 1), got {self.working_null_prob!r}")
        check_kappa(self.kappa)


def confidence_posterior_normal(x: float) -> Gaussian:
    """``N(x, 1)``, whose quantiles are the confidence bounds for a unit-variance normal mean."""
    return Gaussian(x, 1.0)


def confidence_posterior_from_pvalue(p: float) -> Binary:
    """Binary confidence posterior putting the p-value's worth of mass on the null."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p-value must lie in [0, 1], got {p!r}")
    return Binary(p)


def sellke_lower_bound(p: float, pi_prior_low: float) -> float:
    """Lower bound on the posterior null probability from a p-value.

    Uses the calibration ``e * p * log(1/p)`` of the Bayes factor, capped at 1
    for ``p >= 1/e`` where the calibration stops being informative, and never
    exceeds the prior lower bound ``pi_prior_low``.
    """
    if not 0.0 < p <= 1.0:
        raise ValidationError(f"p-value must lie in (0, 1], got {p!r}")
    if not 0.0 < pi_prior_low < 1.0:
        raise ValidationError(f"pi_prior_low must lie in (0, 1), got {pi_prior_low!r}")
    factor = 1.0 if p >= math.exp(-1.0) else min(math.e * p * math.log(1.0 / p), 1.0)
    bound = 1.0 / (1.0 + (1.0 - pi_prior_low) / (pi_prior_low * factor))
    return min(bound, pi_prior_low)


def pair_lower_bound(pair: PValuePair, pi_prior_low: float) -> float:
    """The greater of the bounds implied by each p-value of the pair."""
    return max(sellke_lower_bound(pair.p1, pi_prior_low), sellke_lower_bound(pair.p2, pi_prior_low))


def two_pvalue_blend(pair: PValuePair, cfg: HypothesisConfig, *, pi_low: Optional[float] = None) -> BlendResult:
    """Moderate posterior of the null hypothesis given two p-values.

    The benchmarks are ``Binary(p1)`` and ``Binary(p2)``; the knowledge base
    bounds the null mass below by :func:`pair_lower_bound`, or by ``pi_low``
    when given explicitly.
    """
    if pi_low is None:
        pi_low = pair_lower_bound(pair, cfg.pi_prior_low)
    base = BinaryNullBoundedSet(pi_low)
    benchmarks = BenchmarkSet((confidence_posterior_from_pvalue(pair.p1), confidence_posterior_from_pvalue(pair.p2)))
    return moderate_posterior(Binary(cfg.working_null_prob), base, benchmarks, cfg.kappa)


def self_benchmark_blend(p: float, pi_low: float, kappa: float) -> Binary:
    """Moderate posterior when the p-value's confidence posterior is also the working posterior.

    The null mass is ``max(kappa * pi_low + (1 - kappa) * p, p)``; for
    ``kappa < 1`` it can fall below ``pi_low``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p-value must lie in [0, 1], got {p!r}")
    if not 0.0 < pi_low < 1.0:
        raise ValidationError(f"pi_low must lie in (0, 1), got {pi_low!r}")
    kappa = check_kappa(kappa)
    return Binary(max(kappa * pi_low + (1.0 - kappa) * p, p))


def self_benchmark_projection(p: float, pi_low: float, kappa: float):
    """The same quantity computed by projecting ``Binary(p)`` with itself as working posterior."""
    cset = contract(BinaryNullBoundedSet(pi_low), Binary(p), kappa, require_plausible=False)
    return project_binary(cset, Binary(p))
