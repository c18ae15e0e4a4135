"""Compress a sampled distribution into a small discrete one, with a
certified high-confidence upper bound on the Wasserstein distance."""

from .bounds import (
    BoundProblem,
    BoundResult,
    VertexDecomposition,
    analytic_bound,
    closest_vertex,
    epsilon_theorem1,
    fournier_baseline,
    xi_prop2,
)
from .intervals import ProbabilityBox, build_probability_box, cp_lower, cp_upper
from .partition import (
    KMeansResult,
    Partition,
    assign_weights,
    build_partition,
    cost_upper_matrix,
    lloyd_kmeans,
    region_counts,
)
from .pipeline import build_bound_problem, certify
from .transport import wasserstein
from .types import Config, Dataset, DiscreteDistribution, SupportBox, norm

__version__ = "0.1.0"

__all__ = [
    "BoundProblem",
    "BoundResult",
    "Config",
    "Dataset",
    "DiscreteDistribution",
    "KMeansResult",
    "Partition",
    "ProbabilityBox",
    "SupportBox",
    "VertexDecomposition",
    "analytic_bound",
    "assign_weights",
    "build_bound_problem",
    "build_partition",
    "build_probability_box",
    "certify",
    "closest_vertex",
    "cost_upper_matrix",
    "cp_lower",
    "cp_upper",
    "epsilon_theorem1",
    "fournier_baseline",
    "lloyd_kmeans",
    "norm",
    "region_counts",
    "wasserstein",
    "xi_prop2",
]
