"""Exact and Monte Carlo tools for CLT conditions of non-homogeneous finite Markov chains."""

from .markov_core import (ChainSpec, Distribution, Kernel, Observable, StateSpace,
                          ValidationError, apply_to_function, apply_to_measure,
                          center_observables, compose, compose_range, load_chain, marginals)
from .ergodic import (BetaSequence, HBetaParams, alpha, alpha_beta, alpha_n, check_h_beta,
                      delta, find_beta, osc)
from .gordin import backward_z, section5_diagnostics
from .scheme import ArrayScheme, evaluate_conditions, variance_of_sum
from .families import FamilyParams, family_a, family_b, family_c, make_scheme
from .montecarlo import ks_distance, normal_cdf, sample_statistic

__version__ = "0.1.0"

__all__ = [
    "ArrayScheme", "BetaSequence", "ChainSpec", "Distribution", "FamilyParams", "HBetaParams",
    "Kernel", "Observable", "StateSpace", "ValidationError", "alpha", "alpha_beta", "alpha_n",
    "apply_to_function", "apply_to_measure", "backward_z", "center_observables", "check_h_beta",
    "compose", "compose_range", "delta", "evaluate_conditions", "family_a", "family_b",
    "family_c", "find_beta", "ks_distance", "load_chain", "make_scheme", "marginals",
    "normal_cdf", "osc", "sample_statistic", "section5_diagnostics", "variance_of_sum",
]
