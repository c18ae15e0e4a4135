"""Data-driven regions: clustering, radii, weights, and worst-case costs.

Regions are L_m-balls around k-means centroids truncated by the Voronoi
rule, plus one remainder region for the part of the assumed support box
not covered by any ball. The remainder's representative is the box
center (its Chebyshev center) and its radius half the box diameter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .types import (
    Config,
    Dataset,
    DiscreteDistribution,
    SupportBox,
    _frozen,
    pairwise_distances,
)

KMEANS_MAX_ITER = 300
KMEANS_SHIFT_TOL = 1e-8
DEFAULT_NEIGHBOR_FRAC = 0.05


@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray
    assignment: np.ndarray
    inertia: float
    iterations: int
    inertia_history: tuple = ()


@dataclass(frozen=True)
class Partition:
    """(M-1) ball regions plus the remainder region of the support box."""

    centers: np.ndarray
    radii: np.ndarray
    remainder_center: np.ndarray
    remainder_radius: float
    box: SupportBox

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        radii = np.asarray(self.radii, dtype=float).ravel()
        if centers.shape[0] != radii.shape[0]:
            raise ValueError("need one radius per center")
        if np.any(radii < 0):
            raise ValueError("radii must be nonnegative")
        if not self.box.contains(centers).all():
            raise ValueError("every center must lie inside the box")
        object.__setattr__(self, "centers", _frozen(centers))
        object.__setattr__(self, "radii", _frozen(radii))
        object.__setattr__(self, "remainder_center", _frozen(self.remainder_center))

    @property
    def size(self) -> int:
        """Total number of regions, remainder included."""
        return self.centers.shape[0] + 1

    def all_centers(self) -> np.ndarray:
        return np.vstack([self.centers, self.remainder_center[None, :]])

    def all_radii(self) -> np.ndarray:
        return np.concatenate([self.radii, [self.remainder_radius]])

    def membership(self, points, norm_order=2) -> np.ndarray:
        """Region index per point: nearest center if inside its ball, else remainder.

        Nearest-center ties break toward the lowest index; the remainder
        region has index size - 1.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dists = pairwise_distances(pts, self.centers, norm_order)
        nearest = np.argmin(dists, axis=1)
        inside = dists[np.arange(pts.shape[0]), nearest] <= self.radii[nearest]
        return np.where(inside, nearest, self.size - 1)

    def to_json(self) -> dict:
        return {
            "centers": self.centers.tolist(),
            "radii": self.radii.tolist(),
            "remainder_center": self.remainder_center.tolist(),
            "remainder_radius": self.remainder_radius,
            "box": self.box.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Partition":
        return cls(
            centers=np.asarray(obj["centers"], dtype=float),
            radii=np.asarray(obj["radii"], dtype=float),
            remainder_center=np.asarray(obj["remainder_center"], dtype=float),
            remainder_radius=float(obj["remainder_radius"]),
            box=SupportBox.from_json(obj["box"]),
        )


def _kmeans_pp_init(points: np.ndarray, k: int, rng) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    closest_sq = np.sum((points - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = closest_sq.sum()
        if total <= 0:
            centroids[i:] = points[rng.integers(n, size=k - i)]
            break
        probs = closest_sq / total
        centroids[i] = points[rng.choice(n, p=probs)]
        closest_sq = np.minimum(
            closest_sq, np.sum((points - centroids[i]) ** 2, axis=1)
        )
    return centroids


def lloyd_kmeans(train: Dataset, k: int, cfg: Config) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding, deterministic per rng_seed.

    Empty clusters are repaired by promoting the sample farthest from its
    centroid. Squared-L2 inertia is tracked per iteration.
    """
    points = train.points
    n = points.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > n:
        raise ValueError(f"k = {k} exceeds the {n} training samples")
    rng = np.random.default_rng(cfg.rng_seed)
    centroids = _kmeans_pp_init(points, k, rng)
    history = []
    assignment = np.zeros(n, dtype=int)
    for it in range(1, KMEANS_MAX_ITER + 1):
        d2 = pairwise_distances(points, centroids, 2) ** 2
        assignment = np.argmin(d2, axis=1)
        sample_d2 = d2[np.arange(n), assignment]
        for c in range(k):
            if not np.any(assignment == c):
                far = int(np.argmax(sample_d2))
                centroids[c] = points[far]
                assignment[far] = c
                sample_d2[far] = 0.0
        new_centroids = np.empty_like(centroids)
        for c in range(k):
            new_centroids[c] = points[assignment == c].mean(axis=0)
        inertia = float(sample_d2.sum())
        history.append(inertia)
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift < KMEANS_SHIFT_TOL:
            break
    d2 = pairwise_distances(points, centroids, 2) ** 2
    assignment = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), assignment].sum())
    return KMeansResult(
        centroids=_frozen(centroids),
        assignment=_frozen(assignment, dtype=int),
        inertia=inertia,
        iterations=it,
        inertia_history=tuple(history),
    )


def build_partition(
    train: Dataset,
    M: int,
    cfg: Config,
    box: SupportBox,
    neighbor_frac: float = DEFAULT_NEIGHBOR_FRAC,
) -> Partition:
    """Cluster the training set into M - 1 regions plus the remainder.

    Each radius starts at the maximum distance from the centroid to its
    assigned training samples and is then raised to half the distance to
    the ceil(neighbor_frac * M)-th nearest other centroid (skipped for
    M = 2 where no other centroid exists).
    """
    if M < 2:
        raise ValueError(f"need M >= 2 regions, got {M}")
    if train.dimension != box.dimension:
        raise ValueError("training data and box dimension mismatch")
    km = lloyd_kmeans(train, M - 1, cfg)
    centers = np.asarray(km.centroids)
    dists = pairwise_distances(train.points, centers, cfg.norm_order)
    radii = np.zeros(M - 1)
    for c in range(M - 1):
        mask = km.assignment == c
        if np.any(mask):
            radii[c] = float(dists[mask, c].max())
    if M >= 3:
        q = min(math.ceil(neighbor_frac * M), M - 2)
        cdists = pairwise_distances(centers, centers, cfg.norm_order)
        np.fill_diagonal(cdists, np.inf)
        qth = np.sort(cdists, axis=1)[:, q - 1]
        radii = np.maximum(radii, 0.5 * qth)
    # Centroids are convex combinations of in-box samples, but float
    # round-off can leave them a hair outside; snap them back.
    centers = np.clip(
        centers, box.center - box.half_width, box.center + box.half_width
    )
    return Partition(
        centers=centers,
        radii=radii,
        remainder_center=box.center.copy(),
        remainder_radius=0.5 * box.diameter(cfg.norm_order),
        box=box,
    )


def region_counts(part: Partition, data: Dataset, cfg: Config) -> np.ndarray:
    """Integer sample counts per region (remainder last)."""
    if data.dimension != part.centers.shape[1]:
        raise ValueError("data dimension does not match the partition")
    member = part.membership(data.points, cfg.norm_order)
    return np.bincount(member, minlength=part.size)


def assign_weights(part: Partition, data: Dataset, cfg: Config) -> DiscreteDistribution:
    """Empirical weights over regions; the remainder weight by subtraction."""
    counts = region_counts(part, data, cfg)
    n = data.n
    weights = counts / n
    weights[-1] = max(1.0 - float(weights[:-1].sum()), 0.0)
    return DiscreteDistribution(support=part.all_centers(), weights=weights)


def cost_upper_matrix(part: Partition, cfg: Config) -> np.ndarray:
    """Entrywise upper bound on max_{x in C_i} ||x - c_j||^rho.

    Radius form (r_i + ||c_i - c_j||)^rho off the diagonal, r_i^rho on it,
    clipped at the box diameter (both points always lie inside the box).
    """
    centers = part.all_centers()
    radii = part.all_radii()
    dist = pairwise_distances(centers, centers, cfg.norm_order)
    np.fill_diagonal(dist, 0.0)
    bound = radii[:, None] + dist
    np.fill_diagonal(bound, radii)
    diam = part.box.diameter(cfg.norm_order)
    return np.minimum(bound, diam) ** cfg.rho


def save_partition(part: Partition, path) -> None:
    with open(path, "w") as fh:
        json.dump(part.to_json(), fh, indent=1)


def load_partition(path) -> Partition:
    with open(path) as fh:
        return Partition.from_json(json.load(fh))
