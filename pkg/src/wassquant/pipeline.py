"""End-to-end pipeline: partition, weights, probability box, bound."""

from __future__ import annotations

import time

import numpy as np

from .bounds import (
    BoundProblem,
    BoundResult,
    analytic_bound,
    epsilon_theorem1,
    fournier_baseline,
    xi_prop2,
)
from .intervals import build_probability_box
from .partition import (
    DEFAULT_NEIGHBOR_FRAC,
    Partition,
    assign_weights,
    build_partition,
    cost_upper_matrix,
    region_counts,
)
from .types import Config, Dataset, SupportBox

METHODS = ("theorem1", "prop2", "analytic", "fournier")


def build_bound_problem(
    train: Dataset,
    data: Dataset,
    M: int,
    cfg: Config,
    box: SupportBox,
    neighbor_frac: float = DEFAULT_NEIGHBOR_FRAC,
) -> tuple[BoundProblem, Partition]:
    """Everything before the worst-case solve, shared by all certificate routes."""
    part = build_partition(train, M, cfg, box, neighbor_frac=neighbor_frac)
    counts = region_counts(part, data, cfg)
    pbox = build_probability_box(counts, data.n, cfg.beta)
    dist = assign_weights(part, data, cfg)
    prob = BoundProblem(
        cost=cost_upper_matrix(part, cfg),
        pi=dist.weights,
        box=pbox,
        rho=cfg.rho,
        support=part.all_centers(),
    )
    return prob, part


def certify(
    train: Dataset | None,
    data: Dataset,
    M: int,
    cfg: Config,
    box: SupportBox,
    method: str = "theorem1",
    neighbor_frac: float = DEFAULT_NEIGHBOR_FRAC,
    node_limit: int = 10**6,
    timeout_s: float | None = None,
    moment_constant: float | None = None,
    engine: str = "auto",
) -> BoundResult:
    """Run the full pipeline and return one certified bound record."""
    t0 = time.perf_counter()
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if method == "fournier":
        if moment_constant is None:
            raise ValueError("the fournier baseline needs a moment constant")
        result = fournier_baseline(
            data.n, cfg.beta, cfg, box.diameter(cfg.norm_order), moment_constant
        )
    else:
        if train is None:
            raise ValueError(f"method {method!r} needs a training dataset")
        prob, _ = build_bound_problem(
            train, data, M, cfg, box, neighbor_frac=neighbor_frac
        )
        if method == "theorem1":
            result = epsilon_theorem1(
                prob, engine=engine, node_limit=node_limit, timeout_s=timeout_s
            )
        elif method == "prop2":
            result = xi_prop2(prob, cfg)
        else:
            result = analytic_bound(prob, box.diameter(cfg.norm_order))
    result.rho = cfg.rho
    result.beta = cfg.beta
    result.M = M
    result.N = data.n
    result.runtime_ms = 1e3 * (time.perf_counter() - t0)
    return result
