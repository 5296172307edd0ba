"""Occupancy-grid world model.

A map is a binary occupancy grid over integer cells; planner states are
continuous points whose cell membership is determined by flooring the
coordinates. The module also owns the PNG encoding of maps (black obstacles,
white free space, red/blue start/goal disks, green path overlays) and the
JSON metadata sidecar that travels with every map image.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image

MAP_KINDS = ("blocks", "gaps", "clutter")

# Bit-exact image palette.
COLOR_OBSTACLE = (0, 0, 0)
COLOR_FREE = (255, 255, 255)
COLOR_START = (255, 0, 0)
COLOR_GOAL = (0, 0, 255)
COLOR_PATH_REGION = (0, 255, 0)

KNOWN_COLORS = {COLOR_OBSTACLE, COLOR_FREE, COLOR_START, COLOR_GOAL, COLOR_PATH_REGION}

MARKER_RADIUS = 4.0
DEFAULT_GOAL_RADIUS = 6.0

MIN_DIMENSION = 16


class OutOfBoundsError(ValueError):
    """A point lies outside the half-open map domain [0,w) x [0,h)."""


class MapDecodeError(ValueError):
    """An image does not decode to a valid map (bad shape or unknown color)."""


class WorldPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class GridMap:
    """Binary occupancy grid; ``obstacles[y, x]`` is True on blocked cells."""

    width: int
    height: int
    obstacles: np.ndarray
    map_kind: str = "custom"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.width < MIN_DIMENSION or self.height < MIN_DIMENSION:
            raise ValueError(
                f"map must be at least {MIN_DIMENSION}x{MIN_DIMENSION}, "
                f"got {self.width}x{self.height}"
            )
        obs = np.asarray(self.obstacles, dtype=bool)
        if obs.shape != (self.height, self.width):
            raise ValueError(
                f"obstacle array shape {obs.shape} does not match "
                f"(height, width)=({self.height}, {self.width})"
            )
        if obs.all():
            raise ValueError("map has no free cell")
        obs = obs.copy()
        obs.setflags(write=False)
        object.__setattr__(self, "obstacles", obs)

    @property
    def n_free(self) -> int:
        return int(self.obstacles.size - np.count_nonzero(self.obstacles))

    @property
    def free_fraction(self) -> float:
        return self.n_free / self.obstacles.size

    def in_bounds(self, p: WorldPoint) -> bool:
        return 0.0 <= p[0] < self.width and 0.0 <= p[1] < self.height

    def cells_equal(self, other: "GridMap") -> bool:
        return (
            self.width == other.width
            and self.height == other.height
            and bool(np.array_equal(self.obstacles, other.obstacles))
        )


@dataclass(frozen=True)
class PlanningQuery:
    """Start/goal pair with the goal-region radius, in cell units."""

    start: WorldPoint
    goal: WorldPoint
    goal_radius: float

    def __post_init__(self) -> None:
        if not (self.goal_radius > 0):
            raise ValueError(f"goal_radius must be positive, got {self.goal_radius}")
        for name, p in (("start", self.start), ("goal", self.goal)):
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                raise ValueError(f"{name} has non-finite coordinates: {p}")
        object.__setattr__(self, "start", WorldPoint(float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "goal", WorldPoint(float(self.goal[0]), float(self.goal[1])))


def validate_query(grid: GridMap, query: PlanningQuery) -> None:
    """Check that start and goal are in-bounds free cells of ``grid``."""
    for name, p in (("start", query.start), ("goal", query.goal)):
        if not grid.in_bounds(p):
            raise OutOfBoundsError(f"query {name} {p} outside {grid.width}x{grid.height} map")
        if not is_free(grid, p):
            raise ValueError(f"query {name} {p} lies in an obstacle cell")


def is_free(grid: GridMap, p: WorldPoint) -> bool:
    """True iff the cell containing ``p`` (floored coordinates) is free."""
    x, y = p
    if not (0.0 <= x < grid.width and 0.0 <= y < grid.height):
        raise OutOfBoundsError(f"point {p} outside {grid.width}x{grid.height} map")
    return not grid.obstacles[int(y), int(x)]


# Unit-interval sample grids keyed by segment sample count; collision checks
# run millions of times per planner run, so avoid re-building them.
_TS_CACHE: dict[int, np.ndarray] = {}


def _ts(n: int) -> np.ndarray:
    ts = _TS_CACHE.get(n)
    if ts is None:
        ts = np.linspace(0.0, 1.0, n + 1)
        _TS_CACHE[n] = ts
    return ts


def segment_obstacle_free(
    grid: GridMap, a: WorldPoint, b: WorldPoint, spacing: float = 0.5
) -> bool:
    """Supersampled collision check along the segment a->b.

    Samples at spacing <= ``spacing`` cells, endpoints included; the segment
    is free iff every sampled point lies in a free cell.
    """
    ax, ay = a
    bx, by = b
    if not (0.0 <= ax < grid.width and 0.0 <= ay < grid.height):
        raise OutOfBoundsError(f"point {a} outside {grid.width}x{grid.height} map")
    if not (0.0 <= bx < grid.width and 0.0 <= by < grid.height):
        raise OutOfBoundsError(f"point {b} outside {grid.width}x{grid.height} map")
    dist = math.hypot(bx - ax, by - ay)
    if dist == 0.0:
        return not grid.obstacles[int(ay), int(ax)]
    ts = _ts(max(1, math.ceil(dist / spacing)))
    xs = (ax + ts * (bx - ax)).astype(np.intp)
    ys = (ay + ts * (by - ay)).astype(np.intp)
    return not grid.obstacles[ys, xs].any()


def _rect(obs: np.ndarray, x0: int, y0: int, w: int, h: int) -> None:
    obs[y0 : y0 + h, x0 : x0 + w] = True


def _gen_blocks(obs: np.ndarray, rng: np.random.Generator) -> None:
    h, w = obs.shape
    target = rng.uniform(0.20, 0.42)
    for _ in range(400):
        if np.count_nonzero(obs) / obs.size >= target:
            break
        bw = int(rng.integers(max(2, round(0.08 * w)), max(3, round(0.30 * w)) + 1))
        bh = int(rng.integers(max(2, round(0.08 * h)), max(3, round(0.30 * h)) + 1))
        x0 = int(rng.integers(0, w - bw + 1))
        y0 = int(rng.integers(0, h - bh + 1))
        _rect(obs, x0, y0, bw, bh)


def _gen_gaps(obs: np.ndarray, rng: np.random.Generator) -> None:
    # Full-width horizontal walls, each pierced by 1-3 door openings; walls
    # are added until the (post-door) occupancy reaches a drawn target, which
    # keeps the free fraction inside [0.4, 0.95] at any map size.
    h, w = obs.shape
    thickness = int(rng.integers(max(3, round(0.02 * h)), max(4, round(0.04 * h)) + 1))
    target = rng.uniform(0.07, 0.20)
    margin = thickness + 2
    hi = h - margin - thickness
    if hi <= margin:
        margin, hi = 2, h - 2 - thickness
    blocked_rows = np.zeros(h, dtype=bool)
    for _ in range(64):
        if np.count_nonzero(obs) / obs.size >= target:
            break
        y0 = int(rng.integers(margin, hi))
        if blocked_rows[max(0, y0 - thickness - 4) : y0 + 2 * thickness + 4].any():
            continue
        blocked_rows[y0 : y0 + thickness] = True
        _rect(obs, 0, y0, w, thickness)
        for _ in range(int(rng.integers(1, 4))):
            door_w = int(rng.integers(max(7, round(0.05 * w)), max(8, round(0.12 * w)) + 1))
            x0 = int(rng.integers(0, w - door_w + 1))
            obs[y0 : y0 + thickness, x0 : x0 + door_w] = False


def _gen_clutter(obs: np.ndarray, rng: np.random.Generator) -> None:
    h, w = obs.shape
    target = rng.uniform(0.15, 0.35)
    side_lo = max(2, round(0.015 * min(w, h)))
    side_hi = max(side_lo + 1, round(0.05 * min(w, h)))
    for _ in range(4000):
        if np.count_nonzero(obs) / obs.size >= target:
            break
        side = int(rng.integers(side_lo, side_hi + 1))
        x0 = int(rng.integers(0, w - side + 1))
        y0 = int(rng.integers(0, h - side + 1))
        _rect(obs, x0, y0, side, side)


_GENERATORS = {"blocks": _gen_blocks, "gaps": _gen_gaps, "clutter": _gen_clutter}


def generate_random_map(kind: str, width: int = 256, height: int = 256, seed: int = 0) -> GridMap:
    """Generate a random map; deterministic for a fixed (kind, dims, seed)."""
    if kind not in _GENERATORS:
        raise ValueError(f"unknown map kind {kind!r}; expected one of {MAP_KINDS}")
    if width < MIN_DIMENSION or height < MIN_DIMENSION:
        raise ValueError(f"dimensions must be >= {MIN_DIMENSION}, got {width}x{height}")
    rng = np.random.default_rng(seed)
    obs = np.zeros((height, width), dtype=bool)
    _GENERATORS[kind](obs, rng)
    return GridMap(width=width, height=height, obstacles=obs, map_kind=kind, seed=seed)


def empty_map(width: int = 64, height: int = 64) -> GridMap:
    """All-free map, handy for tests and demos."""
    return GridMap(width, height, np.zeros((height, width), dtype=bool), map_kind="empty")


def disk_mask(width: int, height: int, center: WorldPoint, radius: float) -> np.ndarray:
    """Boolean (height, width) mask of cells whose center lies within ``radius``."""
    ys, xs = np.ogrid[0.5 : height + 0.5, 0.5 : width + 0.5]
    return (xs - center[0]) ** 2 + (ys - center[1]) ** 2 <= radius * radius


def encode_map_image(
    grid: GridMap,
    query: PlanningQuery | None = None,
    path_mask: np.ndarray | None = None,
) -> bytes:
    """Render the map to 8-bit RGB PNG bytes.

    ``path_mask`` (same shape as the grid) paints free cells green before the
    start/goal disks go on top; occupancy semantics ignore both overlays.
    """
    img = np.empty((grid.height, grid.width, 3), dtype=np.uint8)
    img[:] = COLOR_FREE
    img[grid.obstacles] = COLOR_OBSTACLE
    free = ~grid.obstacles
    if path_mask is not None:
        if path_mask.shape != (grid.height, grid.width):
            raise ValueError("path_mask shape does not match map")
        img[path_mask & free] = COLOR_PATH_REGION
    if query is not None:
        validate_query(grid, query)
        img[disk_mask(grid.width, grid.height, query.start, MARKER_RADIUS) & free] = COLOR_START
        img[disk_mask(grid.width, grid.height, query.goal, MARKER_RADIUS) & free] = COLOR_GOAL
    buf = io.BytesIO()
    Image.fromarray(img, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def _marker_centroid(mask: np.ndarray) -> WorldPoint:
    ys, xs = np.nonzero(mask)
    return WorldPoint(float(xs.mean() + 0.5), float(ys.mean() + 0.5))


def decode_map_image(data: bytes) -> tuple[GridMap, PlanningQuery | None]:
    """Decode a map PNG back to a GridMap and, if disks are present, a query.

    Start/goal are recovered as the centroids of the red/blue disks; the
    radius is not recoverable from pixels, so the returned query carries
    ``DEFAULT_GOAL_RADIUS`` (the JSON sidecar is authoritative).
    """
    try:
        img = np.asarray(Image.open(io.BytesIO(data)).convert("RGB"))
    except Exception as exc:
        raise MapDecodeError(f"not a decodable image: {exc}") from exc
    h, w = img.shape[:2]
    flat = img.reshape(-1, 3)
    packed = (
        flat[:, 0].astype(np.uint32) << 16
        | flat[:, 1].astype(np.uint32) << 8
        | flat[:, 2].astype(np.uint32)
    )
    known = {(r << 16) | (g << 8) | b for (r, g, b) in KNOWN_COLORS}
    unknown = ~np.isin(packed, np.fromiter(known, dtype=np.uint32))
    if unknown.any():
        idx = int(np.argmax(unknown))
        raise MapDecodeError(
            f"unknown color {tuple(int(v) for v in flat[idx])} at pixel "
            f"({idx % w}, {idx // w})"
        )
    obstacles = (img == COLOR_OBSTACLE).all(axis=2)
    grid = GridMap(width=w, height=h, obstacles=obstacles, map_kind="custom")
    start_mask = (img == COLOR_START).all(axis=2)
    goal_mask = (img == COLOR_GOAL).all(axis=2)
    query = None
    if start_mask.any() and goal_mask.any():
        query = PlanningQuery(
            start=_marker_centroid(start_mask),
            goal=_marker_centroid(goal_mask),
            goal_radius=DEFAULT_GOAL_RADIUS,
        )
    return grid, query


def write_map_sidecar(path: str | Path, grid: GridMap, query: PlanningQuery, **extra) -> None:
    """Write the JSON metadata sidecar for a map image."""
    meta = {
        "width": grid.width,
        "height": grid.height,
        "kind": grid.map_kind,
        "seed": grid.seed,
        "start": [query.start.x, query.start.y],
        "goal": [query.goal.x, query.goal.y],
        "goal_radius": query.goal_radius,
    }
    meta.update(extra)
    Path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def read_map_sidecar(path: str | Path) -> tuple[dict, PlanningQuery]:
    meta = json.loads(Path(path).read_text())
    query = PlanningQuery(
        start=WorldPoint(*meta["start"]),
        goal=WorldPoint(*meta["goal"]),
        goal_radius=meta["goal_radius"],
    )
    return meta, query
