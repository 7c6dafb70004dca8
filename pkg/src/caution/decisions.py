"""Decision rules under caution.

The caution-blended conditional Gamma-minimax action minimizes
``kappa * sup_{P'} E_{P'}[L] + (1 - kappa) * E_working[L]``; the moderate
posterior action minimizes expected loss under a single moderate posterior.
Losses are negated utilities, so utility tables enter with a sign flip.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Hashable, Optional, Sequence, Union

import numpy as np

from .distributions import (
    Distribution,
    FiniteDiscrete,
    Gaussian,
    as_discrete,
    mean,
    variance,
)
from .errors import InfeasibleSetError, ValidationError
from .posterior_sets import GaussianConjugateSet, check_kappa
from .projection import golden_section

__all__ = [
    "Quadratic",
    "TableLoss",
    "LossSpec",
    "Existence",
    "ActionResult",
    "IntervalSimplexSet",
    "kcg_action_discrete",
    "kcg_action_quadratic",
    "moderate_action",
    "ellsberg_setting",
    "ELLSBERG_STATES",
]

ACTION_TIE_TOL = 1e-12


class Existence(str, enum.Enum):
    UNIQUE = "unique"
    NON_UNIQUE = "non_unique"
    NONEXISTENT = "nonexistent"


@dataclass(frozen=True)
class Quadratic:
    """Squared-error loss ``(a - theta)^2``."""


@dataclass(frozen=True)
class TableLoss:
    """Loss matrix with one row per action and one column per state."""

    actions: tuple
    states: tuple
    loss: tuple

    def __post_init__(self):
        actions, states = tuple(self.actions), tuple(self.states)
        rows = tuple(tuple(float(v) for v in row) for row in self.loss)
        if len(rows) != len(actions) or any(len(r) != len(states) for r in rows):
            raise ValidationError(
                f"loss table must be {len(actions)} x {len(states)} (actions x states)"
            )
        if len(set(actions)) != len(actions) or len(set(states)) != len(states):
            raise ValidationError("action and state labels must be distinct")
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "loss", rows)

    @classmethod
    def from_utility(cls, actions, states, utility) -> "TableLoss":
        return cls(actions, states, [[-u for u in row] for row in utility])

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.loss, dtype=float)


LossSpec = Union[Quadratic, TableLoss]


@dataclass(frozen=True)
class ActionResult:
    action: Optional[Union[Hashable, float]]
    objective: float
    existence: Existence


@dataclass(frozen=True)
class IntervalSimplexSet:
    """Distributions over ``states`` with each mass in ``[lower[i], upper[i]]``."""

    states: tuple
    lower: tuple
    upper: tuple

    def __post_init__(self):
        states = tuple(self.states)
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if not (len(states) == len(lower) == len(upper)):
            raise ValidationError("states, lower and upper must have equal length")
        if any(lo < 0.0 or lo > hi or hi > 1.0 for lo, hi in zip(lower, upper)):
            raise ValidationError("each mass interval must satisfy 0 <= lower <= upper <= 1")
        if math.fsum(lower) > 1.0 + 1e-12 or math.fsum(upper) < 1.0 - 1e-12:
            raise InfeasibleSetError("mass intervals admit no probability vector")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def contains(self, p: Distribution, tol: float = 1e-12) -> bool:
        p = as_discrete(p)
        if p.states != self.states:
            return False
        return all(lo - tol <= m <= hi + tol for m, lo, hi in zip(p.masses, self.lower, self.upper))

    def upper_expectation(self, values: Sequence[float]) -> float:
        """``sup E_P[values]`` over the set: fill the largest values first."""
        masses = list(self.lower)
        free = 1.0 - math.fsum(masses)
        for i in sorted(range(len(values)), key=lambda j: -values[j]):
            if free <= 0.0:
                break
            add = min(self.upper[i] - self.lower[i], free)
            masses[i] += add
            free -= add
        return math.fsum(m * v for m, v in zip(masses, values))


def _pick(objectives, labels) -> ActionResult:
    best = min(objectives)
    winners = [i for i, v in enumerate(objectives) if v <= best + ACTION_TIE_TOL * max(1.0, abs(best))]
    existence = Existence.UNIQUE if len(winners) == 1 else Existence.NON_UNIQUE
    return ActionResult(labels[winners[0]], objectives[winners[0]], existence)


def kcg_action_discrete(
    loss: TableLoss,
    plausible_set: IntervalSimplexSet,
    working: FiniteDiscrete,
    kappa: float,
) -> ActionResult:
    """Caution-blended conditional Gamma-minimax action for a finite problem.

    Ties go to the lowest action index and are reported as ``non_unique``.
    """
    kappa = check_kappa(kappa)
    working = as_discrete(working)
    if plausible_set.states != loss.states or working.states != loss.states:
        raise ValidationError("loss table, plausible set and working posterior need the same states")
    if not plausible_set.contains(working):
        raise ValidationError("working posterior is not in the plausible set")
    w = np.asarray(working.masses)
    objectives = []
    for row in loss.loss:
        total = 0.0
        if kappa > 0.0:
            total += kappa * plausible_set.upper_expectation(row)
        if kappa < 1.0:
            total += (1.0 - kappa) * float(np.dot(w, row))
        objectives.append(total)
    return _pick(objectives, loss.actions)


def _worst_posterior_risk(estimate: float, cset: GaussianConjugateSet, t_lo: float, t_hi: float) -> float:
    # risk (estimate - m)^2 + t with m = (1 - t) mu + t x is convex in mu and in t,
    # so the supremum sits on a corner of the (mu, t) box
    worst = -math.inf
    for mu in (cset.mu_lo, cset.mu_hi):
        for t in (t_lo, t_hi):
            m = (1.0 - t) * mu + t * cset.x
            worst = max(worst, (estimate - m) ** 2 + t)
    return worst


def kcg_action_quadratic(plausible: GaussianConjugateSet, working: Gaussian, kappa: float) -> ActionResult:
    """Caution-blended conditional Gamma-minimax estimate under squared error.

    Worst-case posterior risk is unbounded when ``kappa > 0`` and either
    prior-mean bound is infinite; the action is then ``nonexistent``.
    """
    kappa = check_kappa(kappa)
    if not isinstance(working, Gaussian):
        raise ValidationError("working posterior must be Gaussian")
    if kappa == 0.0:
        return ActionResult(working.mean, working.variance, Existence.UNIQUE)
    if not plausible.mu_bounded:
        return ActionResult(None, math.inf, Existence.NONEXISTENT)

    t_lo, t_hi = plausible.t_bounds

    def blended_risk(estimate):
        own = (estimate - working.mean) ** 2 + working.variance
        total = kappa * _worst_posterior_risk(estimate, plausible, t_lo, t_hi)
        if kappa < 1.0:
            total += (1.0 - kappa) * own
        return total

    corner_means = [
        (1.0 - t) * mu + t * plausible.x for mu in (plausible.mu_lo, plausible.mu_hi) for t in (t_lo, t_hi)
    ]
    lo = min(corner_means + [working.mean])
    hi = max(corner_means + [working.mean])
    estimate, value = golden_section(blended_risk, lo, hi, tol=1e-13)
    # the blended risk is a maximum of strictly convex quadratics, so the minimizer is unique
    return ActionResult(estimate, value, Existence.UNIQUE)


def moderate_action(
    posterior: Distribution,
    loss: LossSpec,
    actions: Optional[Sequence[Hashable]] = None,
) -> ActionResult:
    """Action minimizing expected loss under ``posterior``."""
    if isinstance(loss, Quadratic):
        # the mean minimizes expected squared error, which is then the variance
        return ActionResult(mean(posterior), variance(posterior), Existence.UNIQUE)
    if not isinstance(loss, TableLoss):
        raise ValidationError(f"unsupported loss {loss!r}")
    try:
        post = as_discrete(posterior)
    except Exception:
        raise ValidationError("a loss table needs a discrete posterior") from None
    if post.states != loss.states:
        raise ValidationError(f"posterior states {post.states} do not match loss states {loss.states}")
    if actions is None:
        actions = loss.actions
    unknown = [a for a in actions if a not in loss.actions]
    if unknown or not actions:
        raise ValidationError(f"unknown or empty action list: {unknown!r}")
    w = np.asarray(post.masses)
    objectives = [float(np.dot(w, loss.loss[loss.actions.index(a)])) for a in actions]
    return _pick(objectives, tuple(actions))


ELLSBERG_STATES = ("red", "black", "yellow")
_ELLSBERG_UTILITY = {
    1: (("I", "II"), ((100.0, 0.0, 0.0), (0.0, 100.0, 0.0))),
    2: (("III", "IV"), ((100.0, 0.0, 100.0), (0.0, 100.0, 100.0))),
}


def ellsberg_setting(setting: int):
    """Loss table, plausible set and uniform working posterior for an Ellsberg urn.

    90 balls, exactly 30 red, the rest black or yellow in unknown proportion;
    each action pays $100 on the listed colours.
    """
    if setting not in _ELLSBERG_UTILITY:
        raise ValidationError(f"Ellsberg setting must be 1 or 2, got {setting!r}")
    actions, utility = _ELLSBERG_UTILITY[setting]
    loss = TableLoss.from_utility(actions, ELLSBERG_STATES, utility)
    third = 1.0 / 3.0
    plausible = IntervalSimplexSet(ELLSBERG_STATES, (third, 0.0, 0.0), (third, 2.0 / 3.0, 2.0 / 3.0))
    working = FiniteDiscrete(ELLSBERG_STATES, (third, third, third))
    return loss, plausible, working
