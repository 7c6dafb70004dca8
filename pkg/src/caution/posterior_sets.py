"""Knowledge bases of plausible posteriors and their caution-contracted subsets.

A knowledge base is one of

* :class:`GaussianConjugateSet` -- conjugate normal posteriors for a single
  observation ``x ~ N(theta, 1)`` under priors ``N(mu, sigma^2)`` with
  ``mu`` and ``sigma`` in (possibly infinite) bounds;
* :class:`BinaryNullBoundedSet` -- binary posteriors whose null mass is at
  least ``pi_low`` and strictly below 1;
* :class:`UnconstrainedSet` -- every distribution on the space.

:func:`contract` forms the set ``{kappa * P' + (1 - kappa) * W : P' in base}``
for the working posterior ``W``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .distributions import (
    Binary,
    Distribution,
    FiniteDiscrete,
    Gaussian,
    GaussianMixture,
    same_space,
)
from .errors import MismatchedSpaceError, ValidationError, WorkingNotPlausibleError

__all__ = [
    "WorkingPrior",
    "GaussianConjugateSet",
    "BinaryNullBoundedSet",
    "UnconstrainedSet",
    "KnowledgeBase",
    "ContractedSet",
    "bayes_update_normal",
    "contract",
    "contains",
    "check_kappa",
]

PARAM_TOL = 1e-12


def check_kappa(kappa) -> float:
    try:
        kappa = float(kappa)
    except (TypeError, ValueError):
        raise ValidationError(f"kappa must be a real number, got {kappa!r}") from None
    if not 0.0 <= kappa <= 1.0:
        raise ValidationError(f"kappa must lie in [0, 1], got {kappa!r}")
    return kappa


def _close(a: float, b: float, tol: float = PARAM_TOL) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _gaussians_close(a: Gaussian, b: Gaussian) -> bool:
    return _close(a.mean, b.mean) and _close(a.variance, b.variance)


def variance_map(sigma: float) -> float:
    """Posterior variance ``sigma^2 / (1 + sigma^2)`` for prior scale ``sigma``; 1 at infinity."""
    if math.isinf(sigma):
        return 1.0
    s2 = sigma * sigma
    return s2 / (1.0 + s2)


@dataclass(frozen=True)
class WorkingPrior:
    """The single prior ``N(mu_dot, sigma_dot^2)`` used absent caution."""

    mu_dot: float
    sigma_dot: float

    def __post_init__(self):
        if not math.isfinite(self.mu_dot):
            raise ValidationError(f"mu_dot must be finite, got {self.mu_dot!r}")
        if not (math.isfinite(self.sigma_dot) and self.sigma_dot > 0.0):
            raise ValidationError(f"sigma_dot must be finite and positive, got {self.sigma_dot!r}")


def bayes_update_normal(prior: WorkingPrior, x: float) -> Gaussian:
    """Conjugate posterior of ``theta`` after observing ``x ~ N(theta, 1)``."""
    s2 = prior.sigma_dot**2
    return Gaussian((prior.mu_dot + s2 * x) / (1.0 + s2), s2 / (1.0 + s2))


@dataclass(frozen=True)
class GaussianConjugateSet:
    """Posteriors ``N((mu + s^2 x)/(1 + s^2), s^2/(1 + s^2))`` over bounded ``(mu, s)``.

    ``mu_lo``/``mu_hi`` may be ``-inf``/``inf`` and ``sigma_hi`` may be ``inf``.
    A zero ``sigma_lo`` or infinite bounds are open endpoints: the Dirac
    prior and the flat prior are limits, never members.
    """

    x: float
    mu_lo: float = -math.inf
    mu_hi: float = math.inf
    sigma_lo: float = 0.0
    sigma_hi: float = math.inf

    def __post_init__(self):
        for name in ("x", "mu_lo", "mu_hi", "sigma_lo", "sigma_hi"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, float)) or math.isnan(val):
                raise ValidationError(f"{name} must be a real number, got {val!r}")
            object.__setattr__(self, name, float(val))
        if not math.isfinite(self.x):
            raise ValidationError("x must be finite")
        if self.mu_lo > self.mu_hi or self.mu_lo == math.inf or self.mu_hi == -math.inf:
            raise ValidationError(f"invalid mu bounds [{self.mu_lo}, {self.mu_hi}]")
        if not (0.0 <= self.sigma_lo <= self.sigma_hi) or math.isinf(self.sigma_lo):
            raise ValidationError(f"invalid sigma bounds [{self.sigma_lo}, {self.sigma_hi}]")
        if self.sigma_hi == 0.0:
            raise ValidationError("sigma_hi must be positive")

    @property
    def mu_bounded(self) -> bool:
        return math.isfinite(self.mu_lo) and math.isfinite(self.mu_hi)

    @property
    def t_bounds(self) -> tuple:
        """Closure of the posterior-variance range ``[t_lo, t_hi]`` within ``[0, 1]``."""
        return variance_map(self.sigma_lo), variance_map(self.sigma_hi)

    def posterior(self, mu: float, sigma: float) -> Gaussian:
        return bayes_update_normal(WorkingPrior(mu, sigma), self.x)

    def mean_bounds(self, t: float) -> tuple:
        """Closure of the posterior-mean range at posterior variance ``t``.

        An infinite ``mu`` bound stays infinite even at ``t = 1``, where the
        closure is reached by letting ``mu`` diverge as ``sigma`` does.
        """
        lo = self.mu_lo if math.isinf(self.mu_lo) else (1.0 - t) * self.mu_lo + t * self.x
        hi = self.mu_hi if math.isinf(self.mu_hi) else (1.0 - t) * self.mu_hi + t * self.x
        return lo, hi

    def contains_prior(self, prior: WorkingPrior) -> bool:
        return (
            self.mu_lo <= prior.mu_dot <= self.mu_hi
            and self.sigma_lo <= prior.sigma_dot <= self.sigma_hi
        )

    def contains(self, g: Distribution) -> bool:
        if not isinstance(g, Gaussian):
            return False
        t = g.variance
        t_lo, t_hi = self.t_bounds
        if t >= 1.0 or t < t_lo - PARAM_TOL or t > t_hi + PARAM_TOL:
            return False
        # invert m = (1 - t) mu + t x
        mu = (g.mean - t * self.x) / (1.0 - t)
        slack = 1e-9 * max(1.0, abs(mu))
        return self.mu_lo - slack <= mu <= self.mu_hi + slack


@dataclass(frozen=True)
class BinaryNullBoundedSet:
    """Binary posteriors with null mass in ``[pi_low, 1)``."""

    pi_low: float

    def __post_init__(self):
        if not 0.0 < self.pi_low < 1.0:
            raise ValidationError(f"pi_low must lie in (0, 1), got {self.pi_low!r}")

    def contains(self, q: Distribution) -> bool:
        return isinstance(q, Binary) and self.pi_low <= q.p0 < 1.0


@dataclass(frozen=True)
class UnconstrainedSet:
    """All distributions on the parameter space."""

    def contains(self, q: Distribution) -> bool:
        return True


KnowledgeBase = Union[GaussianConjugateSet, BinaryNullBoundedSet, UnconstrainedSet]


@dataclass(frozen=True)
class ContractedSet:
    """``{kappa * P' + (1 - kappa) * working : P' in base}``.

    Build with :func:`contract`, which validates that the working posterior
    is plausible.
    """

    kappa: float
    working: Distribution
    base: KnowledgeBase

    @property
    def null_interval(self) -> tuple:
        """Null-mass range ``[lo, hi)`` of a contracted :class:`BinaryNullBoundedSet`."""
        if not isinstance(self.base, BinaryNullBoundedSet):
            raise ValidationError("null_interval is defined only for BinaryNullBoundedSet bases")
        k, w = self.kappa, self.working.p0
        return k * self.base.pi_low + (1.0 - k) * w, k + (1.0 - k) * w

    def contains(self, candidate: Distribution) -> bool:
        return contains(self, candidate)


def _check_base_space(base, working):
    if isinstance(base, GaussianConjugateSet) and not isinstance(working, Gaussian):
        raise MismatchedSpaceError("a conjugate normal base needs a Gaussian working posterior")
    if isinstance(base, BinaryNullBoundedSet) and not isinstance(working, Binary):
        raise MismatchedSpaceError("a null-bounded base needs a Binary working posterior")


def contract(
    base: KnowledgeBase,
    working: Distribution,
    kappa: float,
    *,
    require_plausible: bool = True,
) -> ContractedSet:
    """Contract ``base`` toward ``working`` at caution ``kappa``.

    ``require_plausible=False`` skips the membership check on ``working``;
    only the self-benchmark variant, where the working posterior is a
    confidence posterior, needs it.
    """
    kappa = check_kappa(kappa)
    _check_base_space(base, working)
    if require_plausible and not base.contains(working):
        raise WorkingNotPlausibleError(f"working posterior {working!r} is not in {base!r}")
    return ContractedSet(kappa, working, base)


def _split_off_working(candidate, working):
    """Weight on ``working`` and the remaining Gaussian components of a candidate."""
    if isinstance(candidate, Gaussian):
        pairs = [(1.0, candidate)]
    else:
        pairs = [(w, c) for w, c in zip(candidate.weights, candidate.components) if w > 0.0]
    w_work = math.fsum(w for w, c in pairs if _gaussians_close(c, working))
    rest = [(w, c) for w, c in pairs if not _gaussians_close(c, working)]
    return w_work, rest


def _contains_conjugate(cset: ContractedSet, candidate) -> bool:
    k = cset.kappa
    w_work, rest = _split_off_working(candidate, cset.working)
    if not rest:
        return True
    if len(rest) != 1:
        return False
    w_other, g = rest[0]
    # candidate = w_other * g + w_work * working must equal kappa * g + (1 - kappa) * working
    return _close(w_other, k, 1e-12) and cset.base.contains(g)


def contains(cset: ContractedSet, candidate: Distribution) -> bool:
    """Whether ``candidate`` equals ``kappa * P' + (1 - kappa) * working`` for a plausible ``P'``."""
    if not same_space(cset.working, candidate):
        raise MismatchedSpaceError(
            f"{type(candidate).__name__} is not on the space of {type(cset.working).__name__}"
        )
    working, k = cset.working, cset.kappa
    if isinstance(candidate, FiniteDiscrete) and isinstance(working, Binary):
        candidate = Binary(candidate.masses[0])
    if candidate == working:
        return True
    if k == 0.0:
        if isinstance(candidate, Gaussian) and isinstance(working, Gaussian):
            return _gaussians_close(candidate, working)
        return False
    if isinstance(cset.base, UnconstrainedSet):
        # an unbounded convex base absorbs every distribution once kappa > 0
        return True
    if isinstance(cset.base, BinaryNullBoundedSet):
        if not isinstance(candidate, Binary):
            return False
        lo, hi = cset.null_interval
        return lo <= candidate.p0 < hi
    if not isinstance(candidate, (Gaussian, GaussianMixture)):
        return False
    return _contains_conjugate(cset, candidate)
