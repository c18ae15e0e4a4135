"""Discrete rho-Wasserstein distances between finitely supported distributions."""

from __future__ import annotations

import numpy as np

from .solver import solve_transportation
from .types import Config, DiscreteDistribution, pairwise_distances


def _drop_zero_weights(dist: DiscreteDistribution):
    keep = dist.weights > 0.0
    if keep.all():
        return dist.support, dist.weights
    return dist.support[keep], dist.weights[keep]


def wasserstein(
    p: DiscreteDistribution, q: DiscreteDistribution, cfg: Config
) -> float:
    """W_rho(p, q) via the transportation LP on the rho-th power costs.

    Zero-weight support points are dropped before solving to keep the
    transportation problem nondegenerate.
    """
    if p.dimension != q.dimension:
        raise ValueError(
            f"support dimension mismatch: {p.dimension} vs {q.dimension}"
        )
    sup_p, w_p = _drop_zero_weights(p)
    sup_q, w_q = _drop_zero_weights(q)
    cost = pairwise_distances(sup_p, sup_q, cfg.norm_order) ** cfg.rho
    rep = solve_transportation(w_p, w_q, cost)
    return float(max(rep.objective, 0.0) ** (1.0 / cfg.rho))
