"""Synthetic distribution generators, CSV ingestion, box normalization.

Truncation is by rejection (conditioning on the box), not clipping, so
the generated laws are the box-conditioned versions of the nominal ones.
All generators are bit-deterministic per seed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .types import Dataset, SupportBox, _frozen

MIN_ACCEPT_RATE = 1e-4
NORMALIZE_MARGIN = 0.01

#: Bimodal mixture used by the 2D benchmark figures; parameters are a
#: documented default of this package, not externally prescribed.
DEFAULT_MIXTURE = (
    ((-0.2, -0.2), 0.1, 0.5),
    ((0.2, 0.2), 0.1, 0.5),
)


def _rejection_sample(draw, n: int, box: SupportBox, rng) -> np.ndarray:
    """Draw batches from `draw` and keep in-box rows until n are collected."""
    out = np.empty((n, box.dimension))
    filled = 0
    drawn = 0
    while filled < n:
        batch = draw(max(n - filled, 1024), rng)
        drawn += batch.shape[0]
        keep = batch[box.contains(batch)]
        take = min(keep.shape[0], n - filled)
        out[filled : filled + take] = keep[:take]
        filled += take
        if drawn >= 4096 and filled / drawn < MIN_ACCEPT_RATE:
            raise ValueError(
                f"acceptance rate {filled / drawn:.2e} below {MIN_ACCEPT_RATE}; "
                "the box is too small for this distribution"
            )
    return out


def gen_truncated_gaussian(
    n: int, d: int, sigma: float, box: SupportBox, seed: int, role="estimation"
) -> Dataset:
    """Isotropic N(0, sigma^2 I) conditioned on the box by rejection."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if box.dimension != d:
        raise ValueError("box dimension does not match d")
    rng = np.random.default_rng(seed)
    draw = lambda k, r: r.normal(0.0, sigma, size=(k, d))
    return Dataset(points=_rejection_sample(draw, n, box, rng), role=role)


def gen_uniform(
    n: int, d: int, diameter: float, box: SupportBox, seed: int, role="estimation"
) -> Dataset:
    """Uniform law on the centered L-infinity ball of the given diameter."""
    if diameter <= 0:
        raise ValueError(f"diameter must be > 0, got {diameter}")
    if diameter > 2 * box.half_width + 1e-12:
        raise ValueError("diameter exceeds the box")
    if box.dimension != d:
        raise ValueError("box dimension does not match d")
    rng = np.random.default_rng(seed)
    half = diameter / 2.0
    pts = rng.uniform(-half, half, size=(n, d)) + box.center
    return Dataset(points=pts, role=role)


def gen_gaussian_mixture(
    n: int, d: int, components, box: SupportBox, seed: int, role="estimation"
) -> Dataset:
    """Gaussian mixture (mean, sigma, weight) triples, box-conditioned."""
    comps = [
        (np.asarray(mean, dtype=float), float(sigma), float(weight))
        for mean, sigma, weight in components
    ]
    if abs(sum(w for _, _, w in comps) - 1.0) > 1e-9:
        raise ValueError("mixture weights must sum to 1")
    for mean, sigma, _ in comps:
        if mean.shape != (d,):
            raise ValueError("component mean dimension mismatch")
        if sigma <= 0:
            raise ValueError("component sigma must be > 0")
    if box.dimension != d:
        raise ValueError("box dimension does not match d")
    rng = np.random.default_rng(seed)
    weights = np.array([w for _, _, w in comps])

    def draw(k, r):
        which = r.choice(len(comps), size=k, p=weights)
        pts = np.empty((k, d))
        for c, (mean, sigma, _) in enumerate(comps):
            mask = which == c
            pts[mask] = r.normal(0.0, sigma, size=(int(mask.sum()), d)) + mean
        return pts

    return Dataset(points=_rejection_sample(draw, n, box, rng), role=role)


def save_csv(dataset: Dataset, path) -> None:
    d = dataset.dimension
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j}" for j in range(d)])
        for row in dataset.points:
            writer.writerow([repr(val) for val in row])


def load_csv(path, role="estimation") -> Dataset:
    """Rectangular numeric CSV with a header row, one sample per row."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ValueError(
                    f"{path}:{lineno}: ragged row with {len(row)} fields, expected {width}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric cell") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if width != len(header):
        raise ValueError(f"{path}: header has {len(header)} fields, rows have {width}")
    return Dataset(points=np.array(rows), role=role)


def write_manifest(path, n: int, d: int, generator: str, params: dict, seed: int) -> None:
    with open(path, "w") as fh:
        json.dump(
            {"n": n, "d": d, "generator": generator, "params": params, "seed": seed},
            fh,
            indent=1,
        )


@dataclass(frozen=True)
class AffineMap:
    """Per-coordinate map y = scale * x + offset with exact inverse."""

    scale: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scale", _frozen(self.scale))
        object.__setattr__(self, "offset", _frozen(self.offset))

    def apply(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) * self.scale + self.offset

    def invert(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.offset) / self.scale

    @property
    def report_scale(self) -> float:
        """Multiply normalized-unit distances by this to bound original units."""
        return float(np.max(1.0 / self.scale))


def normalize_to_box(data: Dataset, target: SupportBox) -> tuple[Dataset, AffineMap]:
    """Affine per-coordinate map sending observed min/max into the target box.

    The mapped data spans (1 - margin) of each axis, leaving a 1% guard
    against boundary samples. Constant columns are rejected.
    """
    pts = data.points
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = hi - lo
    if np.any(span <= 0):
        cols = np.where(span <= 0)[0].tolist()
        raise ValueError(f"constant columns cannot be normalized: {cols}")
    scale = 2.0 * target.half_width * (1.0 - NORMALIZE_MARGIN) / span
    offset = target.center - scale * (lo + hi) / 2.0
    amap = AffineMap(scale=scale, offset=offset)
    return Dataset(points=amap.apply(pts), role=data.role), amap
