"""Moderate posteriors by information projection onto contracted sets.

For each benchmark ``B`` the projection is ``argmin_{Q in C} I(Q || B)`` over
the contracted set ``C``.  Among several benchmarks, the projections with the
smallest achieved divergence are the candidates, and ties go to the candidate
closest to the working posterior in ``I(working || .)``.  A benchmark that
is itself a member of ``C`` is returned directly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import (
    QUAD_NODES,
    _LOG_2PI,
    _hermite,
    Binary,
    Distribution,
    Divergence,
    Gaussian,
    GaussianMixture,
    kl_divergence,
    mix,
    same_space,
)
from .errors import MismatchedSpaceError, NonConvergenceError, ValidationError
from .posterior_sets import (
    BinaryNullBoundedSet,
    ContractedSet,
    GaussianConjugateSet,
    KnowledgeBase,
    UnconstrainedSet,
    contract,
)

__all__ = [
    "BoundaryFlag",
    "BenchmarkSet",
    "BlendResult",
    "project",
    "project_binary",
    "project_gaussian",
    "moderate_posterior",
    "blended_posterior",
    "golden_section",
]

TIE_TOL = 1e-10
SWEEP_TOL = 1e-10
OBJECTIVE_TOL = 1e-8
MAX_SWEEPS = 400
TRUST_HALF_WIDTH = 12.0
MAX_WIDENINGS = 30
T_FLOOR = 1e-9
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class BoundaryFlag(str, enum.Enum):
    INTERIOR = "interior"
    CLIPPED_LOW = "clipped_low"
    CLIPPED_HIGH = "clipped_high"
    BENCHMARK_ABSORBED = "benchmark_absorbed"


@dataclass(frozen=True)
class BenchmarkSet:
    """Ordered, non-empty collection of benchmark posteriors on one space."""

    benchmarks: tuple

    def __post_init__(self):
        items = tuple(self.benchmarks)
        if not items:
            raise ValidationError("at least one benchmark is required")
        for b in items[1:]:
            if not same_space(items[0], b):
                raise MismatchedSpaceError("benchmarks must share one parameter space")
        object.__setattr__(self, "benchmarks", items)

    def __len__(self):
        return len(self.benchmarks)

    def __iter__(self):
        return iter(self.benchmarks)

    def __getitem__(self, i):
        return self.benchmarks[i]


@dataclass(frozen=True)
class BlendResult:
    posterior: Distribution
    achieved_divergence: Divergence
    selected_benchmark: int
    candidate_count: int
    boundary_flag: BoundaryFlag


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-11):
    """Minimize a unimodal ``f`` on ``[a, b]``; endpoints are always considered.

    Returns ``(x, f(x))``.
    """
    fa, fb = f(a), f(b)
    best = (a, fa) if fa <= fb else (b, fb)
    if b - a <= tol * max(1.0, abs(a), abs(b)):
        return best
    lo, hi = a, b
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
    inner = (x1, f1) if f1 <= f2 else (x2, f2)
    # prefer the endpoint on ties so boundary optima are reported exactly
    return best if best[1] <= inner[1] else inner


def project_binary(cset: ContractedSet, benchmark: Binary):
    """Clip the benchmark's null mass into the contracted interval.

    Returns ``(posterior, divergence, flag)``.  The upper endpoint is
    returned as a closure point even though the interval is open there.
    """
    if not isinstance(cset.base, BinaryNullBoundedSet):
        raise ValidationError("project_binary needs a contracted BinaryNullBoundedSet")
    if not isinstance(benchmark, Binary):
        raise MismatchedSpaceError("project_binary needs a Binary benchmark")
    lo, hi = cset.null_interval
    p = benchmark.p0
    if p < lo:
        q, flag = lo, BoundaryFlag.CLIPPED_LOW
    elif p > hi:
        q, flag = hi, BoundaryFlag.CLIPPED_HIGH
    else:
        q, flag = p, BoundaryFlag.INTERIOR
    post = Binary(q)
    return post, kl_divergence(post, benchmark), flag


def _trust_bounds(lo, hi, center, width):
    if math.isinf(lo) and math.isinf(hi):
        return center - width, center + width
    if math.isinf(lo):
        return min(center - width, hi - width), hi
    if math.isinf(hi):
        return lo, max(center + width, lo + width)
    return lo, hi


def _coordinate_descent(f, u, t, t_lo, t_hi):
    fx = f(u, t)
    for _ in range(MAX_SWEEPS):
        start = fx
        u, fx = golden_section(lambda v: f(v, t), 0.0, 1.0)
        t, fx = golden_section(lambda s: f(u, s), t_lo, t_hi)
        if start - fx < SWEEP_TOL:
            return u, t, fx, True
    return u, t, fx, False


def _mixture_objective(kappa, m, t, working, benchmark):
    # I(kappa N(m, t) + (1 - kappa) working || benchmark), fixed-order Gauss-Hermite
    nodes, wts = _hermite(QUAD_NODES)
    if kappa == 1.0:
        d = m - benchmark.mean
        v2 = benchmark.variance
        return 0.5 * (math.log(v2 / t) + t / v2 + d * d / v2 - 1.0)
    log_k, log_1k = math.log(kappa), math.log1p(-kappa)
    total = 0.0
    for weight, mean_c, var_c in ((kappa, m, t), (1.0 - kappa, working.mean, working.variance)):
        theta = mean_c + math.sqrt(var_c) * nodes
        log_q = np.logaddexp(
            log_k + _log_normal(theta, m, t),
            log_1k + _log_normal(theta, working.mean, working.variance),
        )
        log_b = _log_normal(theta, benchmark.mean, benchmark.variance)
        total += weight * float(np.dot(wts, log_q - log_b))
    return total


def _log_normal(theta, mean_, var):
    return -0.5 * (_LOG_2PI + math.log(var) + (theta - mean_) ** 2 / var)


def project_gaussian(cset: ContractedSet, benchmark: Gaussian):
    """Project a Gaussian benchmark onto a contracted conjugate-normal set.

    Candidates are ``kappa * N(m, t) + (1 - kappa) * working`` with ``t`` the
    posterior variance and ``m`` the posterior mean of a plausible member.
    The search runs over ``(u, t)`` where ``u`` in ``[0, 1]`` places ``m``
    inside its feasible range at ``t``; infinite mean ranges are replaced by a
    trust region around the benchmark that is widened while the optimum sits
    on its edge.  Returns ``(posterior, divergence, flag)``; the posterior is
    a closure point of the set when a bound is open.
    """
    base = cset.base
    if not isinstance(base, GaussianConjugateSet):
        raise ValidationError("project_gaussian needs a contracted GaussianConjugateSet")
    if not isinstance(benchmark, Gaussian):
        raise MismatchedSpaceError("project_gaussian needs a Gaussian benchmark")
    kappa, working = cset.kappa, cset.working
    if kappa == 0.0:
        return working, kl_divergence(working, benchmark), BoundaryFlag.INTERIOR

    t_lo, t_hi = base.t_bounds
    t_lo = max(t_lo, T_FLOOR)
    t_hi = max(t_hi, t_lo)
    if kappa == 1.0:
        return _project_onto_base(base, benchmark, t_lo, t_hi)

    def candidate(m, t):
        return mix(kappa, Gaussian(m, t), working)

    for widening in range(MAX_WIDENINGS):
        width = TRUST_HALF_WIDTH * benchmark.std * 2.0**widening

        def mean_at(u, t):
            lo, hi = _trust_bounds(*base.mean_bounds(t), benchmark.mean, width)
            return lo + u * (hi - lo)

        def objective(u, t):
            return _mixture_objective(kappa, mean_at(u, t), t, working, benchmark)

        runs = []
        for ut in (1.0 / 6.0, 0.5, 5.0 / 6.0):
            for tt in (1.0 / 6.0, 0.5, 5.0 / 6.0):
                runs.append(_coordinate_descent(objective, ut, t_lo + tt * (t_hi - t_lo), t_lo, t_hi))
        converged = [r for r in runs if r[3]]
        if not converged:
            raise NonConvergenceError("coordinate descent did not converge from any start")
        u, t, fx, _ = min(converged, key=lambda r: r[2])
        # a final sweep from the best point must not improve materially
        _, _, polished, _ = _coordinate_descent(objective, u, t, t_lo, t_hi)
        if fx - polished > OBJECTIVE_TOL:
            raise NonConvergenceError(f"objective still moving by {fx - polished:.3g} after refinement")

        lo_inf, hi_inf = (math.isinf(v) for v in base.mean_bounds(t))
        on_trust_edge = (lo_inf and u <= 1e-6) or (hi_inf and u >= 1.0 - 1e-6)
        if not on_trust_edge:
            break
    else:
        raise NonConvergenceError("optimum kept escaping the trust region")

    m = mean_at(u, t)
    component = Gaussian(m, t)
    edge = 1e-7
    if not lo_inf and u <= edge:
        flag = BoundaryFlag.CLIPPED_LOW
    elif not hi_inf and u >= 1.0 - edge:
        flag = BoundaryFlag.CLIPPED_HIGH
    elif t >= t_hi - edge * max(t_hi, 1e-300):
        flag = BoundaryFlag.CLIPPED_HIGH if t_hi > t_lo else BoundaryFlag.INTERIOR
    elif t <= t_lo * (1.0 + edge) and base.sigma_lo > 0.0:
        flag = BoundaryFlag.CLIPPED_LOW
    else:
        flag = BoundaryFlag.INTERIOR

    if abs(m - working.mean) <= 1e-12 * max(1.0, abs(m)) and abs(t - working.variance) <= 1e-12:
        posterior = working
    else:
        posterior = candidate(m, t)
    return posterior, kl_divergence(posterior, benchmark), flag


def _project_onto_base(base: GaussianConjugateSet, benchmark: Gaussian, t_lo: float, t_hi: float):
    # a single Gaussian candidate: the best mean at each t is the benchmark mean
    # clipped into the feasible range, and the remaining objective is convex in t
    def best_mean(t):
        lo, hi = base.mean_bounds(t)
        return min(max(benchmark.mean, lo), hi)

    def objective(t):
        m = best_mean(t)
        v = benchmark.variance
        return 0.5 * (math.log(v / t) + t / v + (m - benchmark.mean) ** 2 / v - 1.0)

    t, _ = golden_section(objective, t_lo, t_hi, tol=1e-13)
    m = best_mean(t)
    lo, hi = base.mean_bounds(t)
    if m == lo and not math.isinf(lo) and benchmark.mean < lo:
        flag = BoundaryFlag.CLIPPED_LOW
    elif m == hi and not math.isinf(hi) and benchmark.mean > hi:
        flag = BoundaryFlag.CLIPPED_HIGH
    elif t == t_hi and t_hi > t_lo:
        flag = BoundaryFlag.CLIPPED_HIGH
    elif t == t_lo and base.sigma_lo > 0.0 and t_hi > t_lo:
        flag = BoundaryFlag.CLIPPED_LOW
    else:
        flag = BoundaryFlag.INTERIOR
    posterior = Gaussian(m, t)
    return posterior, kl_divergence(posterior, benchmark), flag


def project(cset: ContractedSet, benchmark: Distribution):
    """Projection of one benchmark onto ``cset``, dispatched on the base type."""
    if not same_space(cset.working, benchmark):
        raise MismatchedSpaceError("benchmark and working posterior live on different spaces")
    if cset.kappa == 0.0:
        return cset.working, kl_divergence(cset.working, benchmark), BoundaryFlag.INTERIOR
    if isinstance(cset.base, UnconstrainedSet):
        return benchmark, Divergence(0.0), BoundaryFlag.BENCHMARK_ABSORBED
    if isinstance(cset.base, BinaryNullBoundedSet):
        return project_binary(cset, benchmark)
    return project_gaussian(cset, benchmark)


def _closest_to_working(working, indices, posteriors):
    # index order breaks exact ties toward the lowest benchmark index
    scored = [(kl_divergence(working, posteriors[i]).value, i) for i in indices]
    return min(scored)[1]


def _distinct(items):
    out = []
    for it in items:
        if it not in out:
            out.append(it)
    return len(out)


def _check_finite_divergence(base, benchmarks):
    if isinstance(base, BinaryNullBoundedSet):
        for i, b in enumerate(benchmarks):
            if b.p0 in (0.0, 1.0):
                raise ValidationError(
                    f"benchmark {i} has null mass {b.p0}; plausible posteriors diverge from it infinitely"
                )


def moderate_posterior(
    working: Distribution,
    base: KnowledgeBase,
    benchmarks,
    kappa: float,
) -> BlendResult:
    """Moderate posterior with caution ``kappa``.

    ``benchmarks`` is a :class:`BenchmarkSet` or any sequence of
    distributions.  Per-benchmark minimal divergences within ``TIE_TOL`` of
    each other are tied.
    """
    if not isinstance(benchmarks, BenchmarkSet):
        benchmarks = BenchmarkSet(tuple(benchmarks))
    if not same_space(working, benchmarks[0]):
        raise MismatchedSpaceError("benchmarks and working posterior live on different spaces")
    cset = contract(base, working, kappa)
    _check_finite_divergence(base, benchmarks)

    absorbed = [i for i, b in enumerate(benchmarks) if cset.contains(b)]
    if absorbed:
        best = _closest_to_working(working, absorbed, benchmarks.benchmarks)
        return BlendResult(
            posterior=benchmarks[best],
            achieved_divergence=Divergence(0.0),
            selected_benchmark=best,
            candidate_count=_distinct([benchmarks[i] for i in absorbed]),
            boundary_flag=BoundaryFlag.BENCHMARK_ABSORBED,
        )

    projections = [project(cset, b) for b in benchmarks]
    floor = min(d.value for _, d, _ in projections)
    tied = [i for i, (_, d, _) in enumerate(projections) if d.value <= floor + TIE_TOL]
    posteriors = [p for p, _, _ in projections]
    best = tied[0] if len(tied) == 1 else _closest_to_working(working, tied, posteriors)
    post, div, flag = projections[best]
    return BlendResult(
        posterior=post,
        achieved_divergence=div,
        selected_benchmark=best,
        candidate_count=_distinct([posteriors[i] for i in tied]),
        boundary_flag=flag,
    )


def blended_posterior(working: Distribution, base: KnowledgeBase, benchmarks) -> BlendResult:
    """The moderate posterior under complete caution (``kappa = 1``)."""
    return moderate_posterior(working, base, benchmarks, 1.0)
