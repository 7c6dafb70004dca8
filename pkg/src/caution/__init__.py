"""Moderate posteriors between Bayesian and confidence-based inference.

A caution level ``kappa`` in ``[0, 1]`` contracts the set of plausible
posteriors toward a working Bayesian posterior; the moderate posterior is
the information projection of a confidence posterior onto that contracted
set.  ``kappa = 0`` returns the working posterior and ``kappa = 1`` the
blended posterior.
"""

from .confidence import (
    HypothesisConfig,
    PValuePair,
    confidence_posterior_from_pvalue,
    confidence_posterior_normal,
    pair_lower_bound,
    self_benchmark_blend,
    sellke_lower_bound,
    two_pvalue_blend,
)
from .decisions import (
    ActionResult,
    Existence,
    IntervalSimplexSet,
    Quadratic,
    TableLoss,
    ellsberg_setting,
    kcg_action_discrete,
    kcg_action_quadratic,
    moderate_action,
)
from .distributions import (
    Binary,
    Divergence,
    FiniteDiscrete,
    Gaussian,
    GaussianMixture,
    inferential_gain,
    kappa_inferential_gain,
    kl_divergence,
    mean,
    mix,
    variance,
)
from .errors import (
    CautionError,
    InfeasibleSetError,
    MismatchedSpaceError,
    NonConvergenceError,
    NonNumericStatesError,
    UndefinedGainError,
    ValidationError,
    WorkingNotPlausibleError,
)
from .posterior_sets import (
    BinaryNullBoundedSet,
    ContractedSet,
    GaussianConjugateSet,
    UnconstrainedSet,
    WorkingPrior,
    bayes_update_normal,
    contains,
    contract,
)
from .projection import (
    BenchmarkSet,
    BlendResult,
    BoundaryFlag,
    blended_posterior,
    moderate_posterior,
    project,
    project_binary,
    project_gaussian,
)

__version__ = "0.1.0"
