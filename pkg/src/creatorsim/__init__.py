"""Creator-competition simulator under engagement-based recommendation."""

from ._stats import MetricEstimate
from .model import (
    AssumptionReport,
    Content,
    KMR,
    LinearTwitter,
    LinearityParams,
    ModelInstance,
    PreconditionError,
    TypeSpace,
    check_assumptions,
)
from .equilibrium import (
    MixedStrategy,
    cheap_marginal_cdf,
    engagement_eq_homogeneous,
    engagement_eq_two_types,
    engagement_eq_well_separated,
    investment_eq,
    make_well_separated_types,
    n_prime,
    random_eq,
    sample_content,
)
from .game import Metric, RoundOutcome, expected_creator_utility, play_round, recommend, simulate_rounds
from .metrics import (
    closed_form_ucq_homogeneous,
    estimate_re,
    estimate_ucq,
    estimate_uw,
    expected_max_from_cdf,
    investment_engagement_cdf,
    ks_distance,
    limit_engagement_cdf,
)
from .verify import (
    BestResponseReport,
    best_response_gap,
    candidate_deviations,
    check_positive_correlation,
    support_containment,
)

__all__ = [
    "AssumptionReport", "BestResponseReport", "Content", "KMR",
    "LinearTwitter", "LinearityParams", "MetricEstimate", "Metric",
    "MixedStrategy", "ModelInstance", "PreconditionError", "RoundOutcome",
    "TypeSpace", "best_response_gap", "candidate_deviations",
    "cheap_marginal_cdf", "check_assumptions", "check_positive_correlation",
    "closed_form_ucq_homogeneous", "engagement_eq_homogeneous",
    "engagement_eq_two_types", "engagement_eq_well_separated",
    "estimate_re", "estimate_ucq", "estimate_uw", "expected_creator_utility",
    "expected_max_from_cdf", "investment_engagement_cdf", "investment_eq",
    "ks_distance", "limit_engagement_cdf", "make_well_separated_types",
    "n_prime", "play_round", "random_eq", "recommend", "sample_content",
    "simulate_rounds", "support_containment",
]

__version__ = "0.1.0"
