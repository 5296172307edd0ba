"""Sampling strategies for the planners.

Three strategies: uniform over free space, nonuniform over a heatmap-derived
cell distribution (inverse CDF, uniform jitter within the chosen cell), and
the per-draw coin-flip hybrid of the two. Also owns the heatmap exchange
format: 8-bit grayscale PNG (max weight -> 255) plus a JSON sidecar.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .gridworld import GridMap, WorldPoint

MAX_UNIFORM_REJECTIONS = 10**6


class EmptyDistributionError(ValueError):
    """A heatmap carries no positive weight on free cells."""


@dataclass(frozen=True, eq=False)
class Heatmap:
    """Per-cell nonnegative weights over a map-sized grid."""

    width: int
    height: int
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.height, self.width):
            raise ValueError(
                f"weights shape {w.shape} does not match (height, width)="
                f"({self.height}, {self.width})"
            )
        if not np.isfinite(w).all() or (w < 0).any():
            raise ValueError("weights must be finite and nonnegative")
        if not (w > 0).any():
            raise EmptyDistributionError("heatmap has no positive weight")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True, eq=False)
class SamplingDistribution:
    """Normalized inverse-CDF table over the free cells of one map."""

    width: int
    height: int
    support: np.ndarray  # flat cell indices with positive masked weight
    cdf: np.ndarray  # cumulative probabilities over support, last entry 1.0
    probabilities: np.ndarray  # per-support-cell probability, sums to 1
    total_mass: float  # masked weight total before normalization


@dataclass(frozen=True)
class SamplerConfig:
    mix_probability: float = 0.5
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.mix_probability <= 1.0):
            raise ValueError(f"mix_probability must be in [0,1], got {self.mix_probability}")


def build_distribution(heatmap: Heatmap, grid: GridMap) -> SamplingDistribution:
    """Mask obstacle cells to zero and normalize the remaining weights."""
    if (heatmap.width, heatmap.height) != (grid.width, grid.height):
        raise ValueError(
            f"heatmap {heatmap.width}x{heatmap.height} does not match map "
            f"{grid.width}x{grid.height}"
        )
    masked = np.where(grid.obstacles, 0.0, heatmap.weights)
    total = float(masked.sum())
    if total <= 0.0:
        raise EmptyDistributionError("heatmap weight is zero everywhere on free cells")
    flat = masked.ravel()
    support = np.nonzero(flat)[0]
    probs = flat[support] / total
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return SamplingDistribution(
        width=grid.width,
        height=grid.height,
        support=support,
        cdf=cdf,
        probabilities=probs,
        total_mass=total,
    )


def sample_uniform_free(grid: GridMap, rng: np.random.Generator) -> WorldPoint:
    """Uniform point over free area via rejection sampling on the bounding box."""
    obs = grid.obstacles
    w, h = grid.width, grid.height
    for _ in range(MAX_UNIFORM_REJECTIONS):
        x = rng.random() * w
        y = rng.random() * h
        if not obs[int(y), int(x)]:
            return WorldPoint(x, y)
    raise RuntimeError("uniform free-space sampling exceeded the rejection cap")


def sample_cells(dist: SamplingDistribution, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` flat cell indices by inverse CDF over the support table."""
    u = rng.random(n)
    return dist.support[np.searchsorted(dist.cdf, u, side="right")]


def sample_nonuniform(dist: SamplingDistribution, rng: np.random.Generator) -> WorldPoint:
    """One heatmap-weighted draw: inverse-CDF cell choice + in-cell jitter."""
    cell = int(dist.support[np.searchsorted(dist.cdf, rng.random(), side="right")])
    cy, cx = divmod(cell, dist.width)
    return WorldPoint(cx + rng.random(), cy + rng.random())


def sample_hybrid(
    dist: SamplingDistribution,
    grid: GridMap,
    cfg: SamplerConfig,
    rng: np.random.Generator,
) -> WorldPoint:
    """Coin-flip mixture of nonuniform and uniform sampling.

    Degenerate mixes skip the coin so that mix 0 (resp. 1) reproduces the
    uniform (resp. nonuniform) sampler's stream bit for bit.
    """
    p = cfg.mix_probability
    if p <= 0.0:
        return sample_uniform_free(grid, rng)
    if p >= 1.0:
        return sample_nonuniform(dist, rng)
    if rng.random() < p:
        return sample_nonuniform(dist, rng)
    return sample_uniform_free(grid, rng)


def cell_probabilities(dist: SamplingDistribution) -> np.ndarray:
    """Dense (height, width) probability grid, zero off the support."""
    grid = np.zeros(dist.height * dist.width, dtype=np.float64)
    grid[dist.support] = dist.probabilities
    return grid.reshape(dist.height, dist.width)


# Heatmap exchange format: grayscale PNG scaled so the max weight maps to 255,
# with a JSON sidecar next to it (same stem, .json suffix).

NORMALIZATION_TAG = "max255"


def heatmap_to_png(heatmap: Heatmap) -> bytes:
    peak = heatmap.weights.max()
    img = np.round(heatmap.weights / peak * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(img, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def heatmap_from_png(data: bytes) -> Heatmap:
    img = Image.open(io.BytesIO(data))
    if img.mode != "L":
        raise ValueError(f"expected grayscale heatmap PNG, got mode {img.mode!r}")
    arr = np.asarray(img, dtype=np.float64)
    return Heatmap(width=arr.shape[1], height=arr.shape[0], weights=arr)


def sidecar_path(png_path: str | Path) -> Path:
    return Path(png_path).with_suffix(".json")


def save_heatmap(heatmap: Heatmap, png_path: str | Path, map_id: str) -> None:
    png_path = Path(png_path)
    png_path.write_bytes(heatmap_to_png(heatmap))
    sidecar_path(png_path).write_text(
        json.dumps({"map_id": map_id, "normalization": NORMALIZATION_TAG}, sort_keys=True) + "\n"
    )


def load_heatmap(png_path: str | Path) -> Heatmap:
    png_path = Path(png_path)
    side = sidecar_path(png_path)
    if side.exists():
        meta = json.loads(side.read_text())
        norm = meta.get("normalization", NORMALIZATION_TAG)
        if norm != NORMALIZATION_TAG:
            raise ValueError(f"unsupported heatmap normalization {norm!r}")
    return heatmap_from_png(png_path.read_bytes())
