"""Compound geometric and geometric approximations with total variation bounds
computed from failure-rate information."""

from .bounds import (
    BoundReport,
    corollary_ifr_bound,
    hazard_order_bound,
    mixed_poisson_hazard_bound,
    obretenov_bound,
    pmf_hazard_bound,
    poisson_process_bounds,
    polya_bounds,
    stein_factor,
    theorem_main_bound,
    three_state_example,
    translated_bound,
)
from .markov import (
    BirthDeathSpec,
    CountableMarkovChain,
    bd_eta,
    bd_extinction_bound,
    birth_death_chain,
    hitting_time_pmf,
    quasi_stationary_dist,
)
from .metrics import Interval, kolmogorov_distance, tv_distance, wasserstein_distance
from .pmf import (
    CompoundGeometricSpec,
    DiscretePMF,
    compound_geometric_pmf,
    convolve,
    geometric_pmf,
    mixed_poisson_gamma_pmf,
    moments,
    polya_pmf,
)
from .queueing import (
    MG1System,
    ServiceTimeModel,
    busy_period_bound,
    corollary_q1_bound,
    deterministic,
    erlang,
    exponential,
    gamma_service,
    mg1_equilibrium,
)
from .reliability import Classification, failure_rates, hazard_order_leq, stochastic_order_leq

__version__ = "0.1.0"
