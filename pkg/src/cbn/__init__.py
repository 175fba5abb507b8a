"""Conjunctive Bayesian networks: posets of events, closed-form maximum
likelihood, error-tolerant structure selection and exact algebraic invariants.
"""
from .counts import CountVector
from .errors import CbnError
from .estimation import (
    MixtureFit,
    log_likelihood,
    mixture_log_likelihood,
    mixture_probability,
    mle_lambda,
    mle_theta,
    nested_likelihood_ratio,
)
from .model import CbnModel, distribution, genotype_probability, marginal_subsum, sample
from .poset import (
    GenotypeLattice,
    Poset,
    count_order_ideals,
    cover_relations,
    enumerate_order_ideals,
    is_order_ideal,
    poset_from_relations,
)
from .selection import (
    bootstrap_loglik,
    epsilon_poset,
    fit,
    maximal_compatible_poset,
    merge_events,
    scan,
    separates_events,
)

__version__ = "0.1.0"
