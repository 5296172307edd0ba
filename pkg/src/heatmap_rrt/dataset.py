"""Training-corpus generation.

Each dataset pair is one random map plus a random long-range query, with a
ground-truth heatmap accumulated from up to ``k`` independent RRT solution
paths rasterized at stroke width 3. Pairs whose query yields no path are
rejected and resampled. The on-disk layout (``maps/{id}_input.png``,
``maps/{id}_truth.png``, ``maps/{id}_heat.png``, ``maps/{id}.json`` plus a
top-level ``manifest.json``) is the trainer's input contract.
"""

from __future__ import annotations

import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .gridworld import (
    GridMap,
    PlanningQuery,
    WorldPoint,
    encode_map_image,
    generate_random_map,
    write_map_sidecar,
)
from .planners import PlannerConfig, PlanPath, rrt_plan
from .sampling import NORMALIZATION_TAG, EmptyDistributionError, Heatmap, heatmap_to_png

logger = logging.getLogger(__name__)

PATH_STROKE_WIDTH = 3
GREEN_NOISE_FLOOR = 64
DEFAULT_PATHS_PER_MAP = 50
DEFAULT_RRT_BUDGET = 10000
MIN_SEPARATION_FACTOR = 0.5


class EmptyGroundTruthError(RuntimeError):
    """No RRT run produced a path, so the pair has no ground truth."""


@dataclass(frozen=True)
class DatasetPair:
    grid: GridMap
    query: PlanningQuery
    ground_truth: Heatmap
    num_paths_found: int

    def __post_init__(self) -> None:
        if self.num_paths_found < 1:
            raise ValueError("dataset pairs need at least one found path")
        support = self.ground_truth.weights > 0
        if (support & self.grid.obstacles).any():
            raise ValueError("ground-truth support leaks onto obstacle cells")


def rasterize_path_cells(grid: GridMap, path: PlanPath, stroke: int = PATH_STROKE_WIDTH) -> np.ndarray:
    """Boolean mask of free cells covered by the path polyline at ``stroke`` width."""
    mask = np.zeros((grid.height, grid.width), dtype=bool)
    pts = path.waypoints
    half = stroke // 2
    for a, b in zip(pts, pts[1:] if len(pts) > 1 else pts):
        dist = float(np.hypot(b[0] - a[0], b[1] - a[1]))
        n = max(1, int(np.ceil(dist / 0.3)))
        ts = np.linspace(0.0, 1.0, n + 1)
        cx = (a[0] + ts * (b[0] - a[0])).astype(np.intp)
        cy = (a[1] + ts * (b[1] - a[1])).astype(np.intp)
        for dy in range(-half, half + 1):
            for dx in range(-half, half + 1):
                xs = np.clip(cx + dx, 0, grid.width - 1)
                ys = np.clip(cy + dy, 0, grid.height - 1)
                mask[ys, xs] = True
    mask &= ~grid.obstacles
    return mask


def ground_truth_heatmap(
    grid: GridMap,
    query: PlanningQuery,
    k: int = DEFAULT_PATHS_PER_MAP,
    budget: int = DEFAULT_RRT_BUDGET,
    base_seed: int = 0,
) -> tuple[Heatmap, int]:
    """Accumulate ``k`` RRT paths (seeds base_seed..base_seed+k-1) into a heatmap.

    Each found path contributes +1 to every cell its stroke covers; failed
    runs contribute nothing. Raises EmptyGroundTruthError when all fail.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    cfg = PlannerConfig(max_iterations=budget, mode="rrt")
    acc = np.zeros((grid.height, grid.width), dtype=np.float64)
    found = 0
    for j in range(k):
        result = rrt_plan(grid, query, cfg, np.random.default_rng(base_seed + j))
        if result.initial_path is None:
            continue
        acc += rasterize_path_cells(grid, result.initial_path)
        found += 1
    if found == 0:
        raise EmptyGroundTruthError(
            f"no path found in {k} RRT runs at budget {budget}; pair rejected"
        )
    return Heatmap(width=grid.width, height=grid.height, weights=acc), found


def render_ground_truth_image(pair: DatasetPair) -> bytes:
    """Map image with the heatmap support painted green, disks on top."""
    return encode_map_image(
        pair.grid, pair.query, path_mask=pair.ground_truth.weights > 0
    )


def heatmap_from_image(data: bytes) -> Heatmap:
    """Extract a heatmap from an image.

    RGB images go through the green color filter (weight = G - max(R, B),
    clamped at zero, then zeroed below the noise floor); pure red/blue
    start/goal disks vanish under the filter. Grayscale images bypass the
    filter and their intensities are used directly.
    """
    img = Image.open(io.BytesIO(data))
    if img.mode == "L":
        weights = np.asarray(img, dtype=np.float64)
    else:
        arr = np.asarray(img.convert("RGB"), dtype=np.int16)
        g = arr[:, :, 1] - np.maximum(arr[:, :, 0], arr[:, :, 2])
        weights = np.clip(g, 0, None).astype(np.float64)
        weights[weights < GREEN_NOISE_FLOOR] = 0.0
    if not (weights > 0).any():
        raise EmptyDistributionError("image carries no heatmap signal")
    return Heatmap(width=weights.shape[1], height=weights.shape[0], weights=weights)


def _place_query(
    grid: GridMap, rng: np.random.Generator, goal_radius: float
) -> PlanningQuery | None:
    free_y, free_x = np.nonzero(~grid.obstacles)
    min_sep = MIN_SEPARATION_FACTOR * min(grid.width, grid.height)
    for _ in range(2000):
        i, j = rng.integers(0, free_x.size, size=2)
        sx = free_x[i] + rng.random()
        sy = free_y[i] + rng.random()
        gx = free_x[j] + rng.random()
        gy = free_y[j] + rng.random()
        if (sx - gx) ** 2 + (sy - gy) ** 2 >= min_sep * min_sep:
            return PlanningQuery(WorldPoint(sx, sy), WorldPoint(gx, gy), goal_radius)
    return None


def make_pair(
    kinds: tuple[str, ...],
    base_seed: int,
    index: int,
    width: int,
    height: int,
    k: int = DEFAULT_PATHS_PER_MAP,
    budget: int = DEFAULT_RRT_BUDGET,
    goal_radius: float = 6.0,
    max_attempts: int = 20,
) -> tuple[DatasetPair, int]:
    """Build pair ``index`` deterministically; resample until solvable."""
    kind = kinds[index % len(kinds)]
    for attempt in range(max_attempts):
        ss = np.random.SeedSequence((base_seed, index, attempt))
        map_seed, query_seed, gt_seed = (int(s) for s in ss.generate_state(3, np.uint64))
        grid = generate_random_map(kind, width, height, seed=map_seed % 2**63)
        query = _place_query(grid, np.random.default_rng(query_seed), goal_radius)
        if query is None:
            logger.info("pair %d attempt %d: no separated query; resampling", index, attempt)
            continue
        try:
            heat, found = ground_truth_heatmap(grid, query, k, budget, base_seed=gt_seed % 2**31)
        except EmptyGroundTruthError:
            logger.info("pair %d attempt %d: unsolvable query; resampling", index, attempt)
            continue
        return DatasetPair(grid, query, heat, found), attempt
    raise RuntimeError(f"could not build a solvable pair for index {index}")


def write_pair(out_dir: str | Path, pair_id: str, pair: DatasetPair) -> dict:
    """Write the image/heatmap/sidecar quadruple for one pair."""
    maps_dir = Path(out_dir) / "maps"
    maps_dir.mkdir(parents=True, exist_ok=True)
    (maps_dir / f"{pair_id}_input.png").write_bytes(encode_map_image(pair.grid, pair.query))
    (maps_dir / f"{pair_id}_truth.png").write_bytes(render_ground_truth_image(pair))
    (maps_dir / f"{pair_id}_heat.png").write_bytes(heatmap_to_png(pair.ground_truth))
    write_map_sidecar(
        maps_dir / f"{pair_id}.json",
        pair.grid,
        pair.query,
        map_id=pair_id,
        num_paths_found=pair.num_paths_found,
        normalization=NORMALIZATION_TAG,
    )
    return {
        "id": pair_id,
        "kind": pair.grid.map_kind,
        "map_seed": pair.grid.seed,
        "num_paths_found": pair.num_paths_found,
    }


def _pair_task(args) -> dict:
    (out_dir, index, kinds, base_seed, width, height, k, budget, goal_radius) = args
    pair, attempt = make_pair(kinds, base_seed, index, width, height, k, budget, goal_radius)
    entry = write_pair(out_dir, f"pair_{index:05d}", pair)
    entry["attempt"] = attempt
    return entry


def generate_dataset(
    n_pairs: int,
    kinds: tuple[str, ...],
    base_seed: int,
    out_dir: str | Path,
    width: int = 256,
    height: int = 256,
    k: int = DEFAULT_PATHS_PER_MAP,
    budget: int = DEFAULT_RRT_BUDGET,
    goal_radius: float = 6.0,
    jobs: int = 1,
) -> dict:
    """Generate ``n_pairs`` dataset pairs under ``out_dir`` and write the manifest."""
    if n_pairs < 1:
        raise ValueError(f"n_pairs must be >= 1, got {n_pairs}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [
        (out_dir, i, tuple(kinds), base_seed, width, height, k, budget, goal_radius)
        for i in range(n_pairs)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_pair_task, tasks))
    else:
        entries = [_pair_task(t) for t in tasks]
    manifest = {
        "base_seed": base_seed,
        "width": width,
        "height": height,
        "kinds": list(kinds),
        "paths_per_map": k,
        "rrt_budget": budget,
        "goal_radius": goal_radius,
        "normalization": NORMALIZATION_TAG,
        "pairs": entries,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest
