"""Distributions on scalar and binary parameter spaces, and information divergence.

All value types are frozen dataclasses.  The real line carries
:class:`Gaussian` and :class:`GaussianMixture`; finite spaces carry
:class:`Binary` (states ``0`` and ``1``) and :class:`FiniteDiscrete`.  A
``Binary`` is interchangeable with a ``FiniteDiscrete`` over states ``(0, 1)``
wherever two discrete distributions are compared.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from numbers import Real
from typing import Hashable, Union

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .errors import (
    MismatchedSpaceError,
    NonNumericStatesError,
    UndefinedGainError,
    ValidationError,
)

__all__ = [
    "Gaussian",
    "Binary",
    "FiniteDiscrete",
    "GaussianMixture",
    "Distribution",
    "Divergence",
    "kl_divergence",
    "inferential_gain",
    "kappa_inferential_gain",
    "mix",
    "mean",
    "variance",
    "as_discrete",
    "same_space",
]

MASS_TOL = 1e-12
QUAD_NODES = 128
QUAD_REL_TOL = 1e-9
_LOG_2PI = math.log(2.0 * math.pi)


def _finite_real(value, name):
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ValidationError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Gaussian:
    """Normal distribution N(mean, variance)."""

    mean: float
    variance: float

    def __post_init__(self):
        object.__setattr__(self, "mean", _finite_real(self.mean, "mean"))
        v = _finite_real(self.variance, "variance")
        if v <= 0.0:
            raise ValidationError(f"variance must be strictly positive, got {v!r}")
        object.__setattr__(self, "variance", v)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def logpdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        return -0.5 * (_LOG_2PI + math.log(self.variance) + (theta - self.mean) ** 2 / self.variance)

    def pdf(self, theta):
        return np.exp(self.logpdf(theta))


@dataclass(frozen=True)
class Binary:
    """Distribution on ``{0, 1}`` with mass ``p0`` on the null state 0."""

    p0: float

    def __post_init__(self):
        p0 = _finite_real(self.p0, "p0")
        if not 0.0 <= p0 <= 1.0:
            raise ValidationError(f"p0 must lie in [0, 1], got {p0!r}")
        object.__setattr__(self, "p0", p0)

    @property
    def states(self) -> tuple:
        return (0, 1)

    @property
    def masses(self) -> tuple:
        return (self.p0, 1.0 - self.p0)


@dataclass(frozen=True)
class FiniteDiscrete:
    """Distribution over an ordered tuple of distinct state labels."""

    states: tuple
    masses: tuple

    def __post_init__(self):
        states = tuple(self.states)
        masses = tuple(_finite_real(m, "mass") for m in self.masses)
        if not states:
            raise ValidationError("a finite distribution needs at least one state")
        if len(states) != len(masses):
            raise ValidationError(f"{len(states)} states but {len(masses)} masses")
        if len(set(states)) != len(states):
            raise ValidationError(f"states must be distinct: {states!r}")
        if any(m < 0.0 for m in masses):
            raise ValidationError(f"masses must be non-negative: {masses!r}")
        if abs(math.fsum(masses) - 1.0) > MASS_TOL:
            raise ValidationError(f"masses must sum to 1 (got {math.fsum(masses)!r})")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "masses", masses)

    def prob(self, state: Hashable) -> float:
        return self.masses[self.states.index(state)]


@dataclass(frozen=True)
class GaussianMixture:
    """Finite mixture ``sum_k weights[k] * components[k]`` of Gaussians."""

    weights: tuple
    components: tuple

    def __post_init__(self):
        weights = tuple(_finite_real(w, "weight") for w in self.weights)
        components = tuple(self.components)
        if not components or len(weights) != len(components):
            raise ValidationError("weights and components must be non-empty and of equal length")
        if not all(isinstance(c, Gaussian) for c in components):
            raise ValidationError("mixture components must be Gaussian")
        if any(w < 0.0 for w in weights):
            raise ValidationError(f"weights must be non-negative: {weights!r}")
        if abs(math.fsum(weights) - 1.0) > MASS_TOL:
            raise ValidationError(f"weights must sum to 1 (got {math.fsum(weights)!r})")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "components", components)

    def logpdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        terms = [math.log(w) + c.logpdf(theta) for w, c in zip(self.weights, self.components) if w > 0.0]
        return logsumexp(np.stack(terms), axis=0)

    def pdf(self, theta):
        return np.exp(self.logpdf(theta))


Distribution = Union[Gaussian, Binary, FiniteDiscrete, GaussianMixture]
Continuous = (Gaussian, GaussianMixture)
Discrete = (Binary, FiniteDiscrete)


@functools.total_ordering
@dataclass(frozen=True)
class Divergence:
    """Non-negative extended real; ``Divergence.infinite()`` is +inf."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v) or v < 0.0:
            raise ValidationError(f"divergence must be non-negative, got {v!r}")
        object.__setattr__(self, "value", v)

    @classmethod
    def infinite(cls) -> "Divergence":
        return cls(math.inf)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self):
        return self.value

    def __lt__(self, other):
        return self.value < float(other)

    def __eq__(self, other):
        if isinstance(other, (Divergence, Real)):
            return self.value == float(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __str__(self):
        return "inf" if not self.is_finite else repr(self.value)


def as_discrete(p: Distribution) -> FiniteDiscrete:
    if isinstance(p, FiniteDiscrete):
        return p
    if isinstance(p, Binary):
        return FiniteDiscrete((0, 1), p.masses)
    raise MismatchedSpaceError(f"{type(p).__name__} is not a discrete distribution")


def same_space(p: Distribution, q: Distribution) -> bool:
    if isinstance(p, Continuous) and isinstance(q, Continuous):
        return True
    if isinstance(p, Discrete) and isinstance(q, Discrete):
        return as_discrete(p).states == as_discrete(q).states
    return False


def _check_space(*dists):
    first = dists[0]
    for other in dists[1:]:
        if not same_space(first, other):
            raise MismatchedSpaceError(
                f"{type(first).__name__} and {type(other).__name__} live on different spaces"
            )


def _components(p):
    if isinstance(p, Gaussian):
        return (1.0,), (p,)
    return p.weights, p.components


@functools.lru_cache(maxsize=None)
def _hermite(n):
    x, w = np.polynomial.hermite.hermgauss(n)
    return x * math.sqrt(2.0), w / math.sqrt(math.pi)


def _expect_gh(p, f, n):
    # E_p[f] with n Gauss-Hermite nodes centred on each mixture component
    total = 0.0
    nodes, wts = _hermite(n)
    for w, c in zip(*_components(p)):
        if w > 0.0:
            total += w * float(np.dot(wts, f(c.mean + c.std * nodes)))
    return total


def _expect_adaptive(p, f):
    weights, comps = _components(p)
    means = [c.mean for c in comps]
    spread = max(c.std for c in comps)
    lo, hi = min(means) - 40.0 * spread, max(means) + 40.0 * spread
    breaks = sorted(set(means))
    val, _ = integrate.quad(
        lambda t: float(p.pdf(t) * f(np.array([t]))[0]),
        lo,
        hi,
        points=breaks if len(breaks) <= 50 else None,
        epsabs=1e-13,
        epsrel=1e-11,
        limit=500,
    )
    return val


def _continuous_kl(p, q):
    def log_ratio(theta):
        return p.logpdf(theta) - q.logpdf(theta)

    coarse = _expect_gh(p, log_ratio, QUAD_NODES)
    fine = _expect_gh(p, log_ratio, 2 * QUAD_NODES)
    if abs(fine - coarse) > QUAD_REL_TOL * max(1.0, abs(fine)):
        fine = _expect_adaptive(p, log_ratio)
    return max(fine, 0.0)


def _gaussian_kl(p: Gaussian, q: Gaussian) -> float:
    v1, v2 = p.variance, q.variance
    d = p.mean - q.mean
    val = 0.5 * (math.log(v2 / v1) + v1 / v2 + d * d / v2 - 1.0)
    return max(val, 0.0)


def _discrete_kl(p, q) -> float:
    total = 0.0
    for pi, qi in zip(as_discrete(p).masses, as_discrete(q).masses):
        if pi == 0.0:
            continue
        if qi == 0.0:
            return math.inf
        total += pi * math.log(pi / qi)
    return max(total, 0.0)


def kl_divergence(p: Distribution, q: Distribution) -> Divergence:
    """Information divergence ``I(p || q) = E_p[log(dp/dq)]``.

    Infinite when ``p`` puts mass where ``q`` has none.  Gaussian pairs use
    the closed form; other continuous pairs use Gauss-Hermite quadrature with
    an adaptive fallback.

    >>> kl_divergence(Gaussian(1.0, 1.0), Gaussian(0.0, 1.0)).value
    0.5
    """
    _check_space(p, q)
    if isinstance(p, Gaussian) and isinstance(q, Gaussian):
        return Divergence(_gaussian_kl(p, q))
    if isinstance(p, Continuous):
        return Divergence(_continuous_kl(p, q))
    return Divergence(_discrete_kl(p, q))


def inferential_gain(reference: Distribution, benchmark: Distribution, candidate: Distribution) -> float:
    """Gain ``I(reference||benchmark) - I(reference||candidate)`` of replacing the benchmark."""
    _check_space(reference, benchmark, candidate)
    base = kl_divergence(reference, benchmark)
    if not base.is_finite:
        raise UndefinedGainError("I(reference || benchmark) is infinite")
    other = kl_divergence(reference, candidate)
    if not other.is_finite:
        return -math.inf
    return base.value - other.value


def mix(kappa: float, p: Distribution, q: Distribution) -> Distribution:
    """The mixture ``kappa * p + (1 - kappa) * q``, kept in the narrowest type."""
    kappa = _finite_real(kappa, "kappa")
    if not 0.0 <= kappa <= 1.0:
        raise ValidationError(f"kappa must lie in [0, 1], got {kappa!r}")
    _check_space(p, q)
    if kappa == 1.0:
        return p
    if kappa == 0.0:
        return q
    if isinstance(p, Binary) and isinstance(q, Binary):
        return Binary(kappa * p.p0 + (1.0 - kappa) * q.p0)
    if isinstance(p, Discrete):
        dp, dq = as_discrete(p), as_discrete(q)
        masses = [kappa * a + (1.0 - kappa) * b for a, b in zip(dp.masses, dq.masses)]
        return FiniteDiscrete(dp.states, masses)
    wp, cp = _components(p)
    wq, cq = _components(q)
    weights = [kappa * w for w in wp] + [(1.0 - kappa) * w for w in wq]
    return GaussianMixture(tuple(weights), tuple(cp) + tuple(cq))


def kappa_inferential_gain(
    plausible: Distribution,
    working: Distribution,
    benchmark: Distribution,
    candidate: Distribution,
    kappa: float,
) -> float:
    """Inferential gain with reference ``kappa * plausible + (1 - kappa) * working``."""
    _check_space(plausible, working, benchmark, candidate)
    return inferential_gain(mix(kappa, plausible, working), benchmark, candidate)


def _numeric_states(p):
    states = as_discrete(p).states
    if not all(isinstance(s, Real) and not isinstance(s, bool) for s in states):
        raise NonNumericStatesError(f"states {states!r} are not numeric")
    return np.asarray(states, dtype=float)


def mean(p: Distribution) -> float:
    """First moment of ``p``."""
    if isinstance(p, Gaussian):
        return p.mean
    if isinstance(p, GaussianMixture):
        return math.fsum(w * c.mean for w, c in zip(p.weights, p.components))
    values = _numeric_states(p)
    return math.fsum(values * np.asarray(as_discrete(p).masses))


def variance(p: Distribution) -> float:
    """Second central moment of ``p``."""
    if isinstance(p, Gaussian):
        return p.variance
    m = mean(p)
    if isinstance(p, GaussianMixture):
        return math.fsum(w * (c.variance + (c.mean - m) ** 2) for w, c in zip(p.weights, p.components))
    values = _numeric_states(p)
    return math.fsum((values - m) ** 2 * np.asarray(as_discrete(p).masses))
