"""Shared numeric and configuration types.

Everything in here is immutable after construction and safe to share
across threads; the operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: Ground-metric orders supported throughout the package.
SUPPORTED_ORDERS = (1.0, 2.0, math.inf)

WEIGHT_SUM_TOL = 1e-9
WEIGHT_SUM_TOL_INTERNAL = 1e-12


def as_order(order) -> float:
    """Normalize a norm order given as 1, 2, "inf", or math.inf."""
    if isinstance(order, str):
        if order.lower() in ("inf", "infinity", "oo"):
            return math.inf
        order = float(order)
    order = float(order)
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"norm order must be one of 1, 2, inf; got {order}")
    return order


def _frozen(arr, dtype=float) -> np.ndarray:
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Config:
    """Run-wide parameters: Wasserstein order, ground metric, confidence.

    rho        -- Wasserstein order, >= 1.
    norm_order -- ground-metric order, one of {1, 2, inf}.
    beta       -- global confidence level in (0, 1).
    dimension  -- ambient dimension, >= 1.
    rng_seed   -- seed for every random choice made downstream.
    """

    rho: float = 1.0
    norm_order: float = 2.0
    beta: float = 1e-6
    dimension: int = 2
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "norm_order", as_order(self.norm_order))
        if self.rho < 1:
            raise ValueError(f"rho must be >= 1, got {self.rho}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")


@dataclass(frozen=True)
class SupportBox:
    """Axis-aligned hypercube assumed to contain the unknown support."""

    center: np.ndarray
    half_width: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(np.atleast_1d(self.center)))
        if self.center.ndim != 1:
            raise ValueError("box center must be a vector")
        if self.half_width <= 0:
            raise ValueError(f"half_width must be > 0, got {self.half_width}")

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    def diameter(self, order=2) -> float:
        """L_m diameter: 2h * d**(1/m) for finite m, 2h for m = inf."""
        order = as_order(order)
        if order == math.inf:
            return 2.0 * self.half_width
        return 2.0 * self.half_width * self.dimension ** (1.0 / order)

    def contains(self, points, atol: float = 0.0) -> np.ndarray:
        """Boolean mask of rows of `points` lying inside the box."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dimension:
            raise ValueError("dimension mismatch between points and box")
        return np.all(np.abs(pts - self.center) <= self.half_width + atol, axis=1)

    def to_json(self) -> dict:
        return {"center": self.center.tolist(), "half_width": self.half_width}

    @classmethod
    def from_json(cls, obj: dict) -> "SupportBox":
        return cls(np.asarray(obj["center"], dtype=float), float(obj["half_width"]))


@dataclass(frozen=True)
class Dataset:
    """An N x d matrix of i.i.d. sample coordinates with a role tag."""

    points: np.ndarray
    role: str = "estimation"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("dataset points must be an N x d matrix")
        if pts.shape[0] < 1:
            raise ValueError("dataset must contain at least one sample")
        if self.role not in ("training", "estimation"):
            raise ValueError(f"unknown dataset role {self.role!r}")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported distribution: M support points with weights."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        sup = np.atleast_2d(np.asarray(self.support, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if sup.shape[0] != w.shape[0]:
            raise ValueError("support and weights must have matching length")
        if sup.shape[0] < 1:
            raise ValueError("need at least one support point")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        total = w.sum()
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {total}, outside tolerance {WEIGHT_SUM_TOL}")
        w = w / total
        assert abs(w.sum() - 1.0) <= WEIGHT_SUM_TOL_INTERNAL
        object.__setattr__(self, "support", _frozen(sup))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def size(self) -> int:
        return self.support.shape[0]

    @property
    def dimension(self) -> int:
        return self.support.shape[1]


def norm(x, y, order=2) -> float:
    """L_m distance between two vectors of equal dimension."""
    order = as_order(order)
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(np.linalg.norm(x - y, ord=order))


def pairwise_distances(a, b, order=2) -> np.ndarray:
    """All L_m distances between rows of `a` (k x d) and rows of `b` (l x d)."""
    order = as_order(order)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if order == 2.0 and a.shape[0] * b.shape[0] * a.shape[1] > 20_000_000:
        # Gram expansion avoids the k x l x d intermediate; clamp fp negatives.
        sq = (
            np.sum(a * a, axis=1)[:, None]
            + np.sum(b * b, axis=1)[None, :]
            - 2.0 * (a @ b.T)
        )
        return np.sqrt(np.maximum(sq, 0.0))
    diff = np.abs(a[:, None, :] - b[None, :, :])
    if order == math.inf:
        return diff.max(axis=2)
    if order == 2.0:
        return np.sqrt(np.sum(diff * diff, axis=2))
    return diff.sum(axis=2)
