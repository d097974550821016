"""Simulation, exact moments and normal-approximation checks for step-reinforced random walks."""

from .distributions import StepDistribution, discrete, gaussian, make_distribution, rademacher
from .enumeration import enum_delta_pmf, enum_percolation, enum_tree_functionals, enum_walk_pmf
from .gof import RateTable, dk_sample, dkw_halfwidth, fit_slope, normal_cdf, rate_experiment
from .graphs import Graph, be_bound, exact_mean_count, percolate_graph
from .moments import (
    TheoryConstants,
    a_n_l,
    a_product,
    b_l,
    bn,
    exact_mean_mu,
    ez,
    ez2_closed,
    rate_delta1,
    rate_delta2,
    theory_constants,
    varz2,
)
from .percolation import (
    ClusterStats,
    RecursiveTree,
    TreeFunctionals,
    cluster_subtrees,
    conditional_variance,
    degrees,
    delta_tree,
    grow_tree,
    mu_of_tree,
    percolate,
    sigma2_of_tree,
    z_stat,
)
from .rng import RandomStream
from .walks import (
    WalkParams,
    WalkTrace,
    normalized_statistic,
    representation_check,
    sample_delta,
    simulate_negative,
    simulate_positive,
)

__version__ = "0.1.0"
