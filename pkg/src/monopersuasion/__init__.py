"""Optimal monotone and unrestricted signals for linear persuasion problems."""

from .continuous import (check_bipooling_condition, construct_bipooling, solve_cutoff_rule,
                         solve_interval_disclosure, solve_monotone_continuous, unrestricted_value)
from .discrete import partition_value, solve_monotone_discrete, solve_stochastic_uc, uc_walk
from .objective import ObjectiveFn, classify_shape, concavify_at, solve_bitangent, tangent_gap
from .oracle import brute_force, enumerate_partitions, grid_search_continuous
from .priors import (BetaMixturePrior, DiscretePrior, PiecewiseUniformPrior, induce_distribution,
                     prior_from_dict, verify_contraction)
from .signals import MonotonePartition, PoolingSet, SetPartition, StochasticUpperCensorship

__version__ = "0.1.0"

__all__ = [
    "BetaMixturePrior", "DiscretePrior", "MonotonePartition", "ObjectiveFn", "PiecewiseUniformPrior",
    "PoolingSet", "SetPartition", "StochasticUpperCensorship", "brute_force", "check_bipooling_condition",
    "classify_shape", "concavify_at", "construct_bipooling", "enumerate_partitions",
    "grid_search_continuous", "induce_distribution", "partition_value", "prior_from_dict",
    "solve_bitangent", "solve_cutoff_rule", "solve_interval_disclosure", "solve_monotone_continuous",
    "solve_monotone_discrete", "solve_stochastic_uc", "tangent_gap", "uc_walk", "unrestricted_value",
    "verify_contraction",
]
