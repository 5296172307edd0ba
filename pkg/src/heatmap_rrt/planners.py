"""Tree-based planners: RRT, RRT*, and heatmap-guided RRT*.

All three share one Tree structure and the same primitives (nearest, steer,
segment collision check). RRT stops at the first path into the goal region;
the starred planners run their full iteration budget, keep the first path
found as the initial path, and report the cheapest goal-reaching path at
exit. The heatmap-guided planner is RRT* with the hybrid sampler; nothing
else differs.
"""

from __future__ import annotations

import io
import json
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from PIL import Image, ImageDraw

from . import sampling
from .gridworld import (
    COLOR_GOAL,
    COLOR_PATH_REGION,
    COLOR_START,
    GridMap,
    MARKER_RADIUS,
    PlanningQuery,
    WorldPoint,
    disk_mask,
    segment_obstacle_free,
    validate_query,
)  # noqa: F401  (COLOR_* re-exported for render callers)
from .sampling import Heatmap, SamplerConfig, SamplingDistribution

logger = logging.getLogger(__name__)

COLOR_PLAN_PATH = (186, 85, 211)

PLANNER_MODES = ("rrt", "rrt_star", "heatmap_rrt_star")

Sampler = Callable[[np.random.Generator], WorldPoint]
IterationHook = Callable[[int, "Tree", float | None], None]


@dataclass(frozen=True)
class PlannerConfig:
    step_size: float = 6.0
    max_iterations: int = 10000
    rewire_radius: float = 12.0
    collision_spacing: float = 0.5
    mode: str = "rrt_star"

    def __post_init__(self) -> None:
        if not (self.step_size > 0):
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if self.rewire_radius < self.step_size:
            raise ValueError(
                f"rewire_radius ({self.rewire_radius}) must be >= step_size ({self.step_size})"
            )
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not (self.collision_spacing > 0):
            raise ValueError(f"collision_spacing must be positive, got {self.collision_spacing}")
        if self.mode not in PLANNER_MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {PLANNER_MODES}")


class Tree:
    """Rooted search tree over growable parallel arrays.

    Vertex 0 is the root (parent -1, cost 0). Costs are maintained
    incrementally; rewiring shifts whole subtrees by the exact cost delta.
    """

    __slots__ = ("xs", "ys", "parent", "cost", "children", "n")

    def __init__(self, root: WorldPoint, capacity: int = 1024):
        self.xs = np.empty(capacity, dtype=np.float64)
        self.ys = np.empty(capacity, dtype=np.float64)
        self.parent = np.empty(capacity, dtype=np.int64)
        self.cost = np.empty(capacity, dtype=np.float64)
        self.children: list[list[int]] = [[]]
        self.xs[0] = root[0]
        self.ys[0] = root[1]
        self.parent[0] = -1
        self.cost[0] = 0.0
        self.n = 1

    def __len__(self) -> int:
        return self.n

    def point(self, i: int) -> WorldPoint:
        return WorldPoint(float(self.xs[i]), float(self.ys[i]))

    def _grow(self) -> None:
        cap = 2 * self.xs.size
        for name in ("xs", "ys", "parent", "cost"):
            arr = getattr(self, name)
            new = np.empty(cap, dtype=arr.dtype)
            new[: self.n] = arr[: self.n]
            setattr(self, name, new)

    def add(self, p: WorldPoint, parent: int, cost: float) -> int:
        if self.n == self.xs.size:
            self._grow()
        i = self.n
        self.xs[i] = p[0]
        self.ys[i] = p[1]
        self.parent[i] = parent
        self.cost[i] = cost
        self.children.append([])
        self.children[parent].append(i)
        self.n = i + 1
        return i

    def reparent(self, v: int, new_parent: int, new_cost: float) -> None:
        delta = new_cost - self.cost[v]
        self.children[self.parent[v]].remove(v)
        self.children[new_parent].append(v)
        self.parent[v] = new_parent
        self.cost[v] = new_cost
        stack = list(self.children[v])
        while stack:
            u = stack.pop()
            self.cost[u] += delta
            stack.extend(self.children[u])

    def path_to_root(self, v: int) -> list[WorldPoint]:
        chain = []
        i = v
        guard = self.n
        while i >= 0:
            chain.append(self.point(i))
            i = int(self.parent[i])
            guard -= 1
            if guard < 0:
                raise RuntimeError("parent chain does not terminate at root")
        chain.reverse()
        return chain

    def max_cost_incoherence(self) -> float:
        """Largest |cost(v) - cost(parent(v)) - edge length| over the tree."""
        n = self.n
        if n == 1:
            return 0.0
        par = self.parent[1:n]
        dx = self.xs[1:n] - self.xs[par]
        dy = self.ys[1:n] - self.ys[par]
        expect = self.cost[par] + np.hypot(dx, dy)
        return float(np.abs(self.cost[1:n] - expect).max())


@dataclass(frozen=True)
class PlanPath:
    """Waypoint polyline from the start into the goal region."""

    waypoints: tuple[WorldPoint, ...]
    length: float

    @classmethod
    def from_waypoints(cls, pts: list[WorldPoint]) -> "PlanPath":
        total = 0.0
        for a, b in zip(pts, pts[1:]):
            total += math.hypot(b[0] - a[0], b[1] - a[1])
        return cls(waypoints=tuple(pts), length=total)


@dataclass
class PlanResult:
    tree: Tree
    initial_path: PlanPath | None
    best_path: PlanPath | None
    iterations_used: int
    nodes_at_first_solution: int | None
    wall_time: float


def nearest(tree: Tree, p: WorldPoint) -> int:
    """Index of the closest vertex; ties break to the lowest index."""
    n = tree.n
    dx = tree.xs[:n] - p[0]
    dy = tree.ys[:n] - p[1]
    dx *= dx
    dy *= dy
    dx += dy
    return int(np.argmin(dx))


def near(tree: Tree, p: WorldPoint, radius: float) -> np.ndarray:
    """Indices of all vertices within ``radius``, ascending."""
    n = tree.n
    dx = tree.xs[:n] - p[0]
    dy = tree.ys[:n] - p[1]
    dx *= dx
    dy *= dy
    dx += dy
    return np.nonzero(dx <= radius * radius)[0]


def steer(from_: WorldPoint, to: WorldPoint, step_size: float) -> WorldPoint:
    """Move from ``from_`` toward ``to`` by at most ``step_size``."""
    dx = to[0] - from_[0]
    dy = to[1] - from_[1]
    d = math.hypot(dx, dy)
    if d <= step_size:
        return WorldPoint(float(to[0]), float(to[1]))
    s = step_size / d
    return WorldPoint(from_[0] + dx * s, from_[1] + dy * s)


def validate_path(
    grid: GridMap, query: PlanningQuery, path: PlanPath, spacing: float = 0.5
) -> None:
    """Raise AssertionError if ``path`` violates any path invariant."""
    pts = path.waypoints
    assert len(pts) >= 1, "path has no waypoints"
    assert pts[0] == query.start, f"path starts at {pts[0]}, not the query start"
    last = pts[-1]
    dist_goal = math.hypot(last[0] - query.goal[0], last[1] - query.goal[1])
    assert dist_goal < query.goal_radius, (
        f"path ends {dist_goal:.6f} from goal, outside radius {query.goal_radius}"
    )
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        assert segment_obstacle_free(grid, a, b, spacing), f"segment {a}->{b} collides"
        total += math.hypot(b[0] - a[0], b[1] - a[1])
    assert abs(total - path.length) <= 1e-9, "stored length disagrees with waypoints"
    straight = math.hypot(query.goal[0] - query.start[0], query.goal[1] - query.start[1])
    assert path.length >= straight - query.goal_radius - 1e-9, "path shorter than possible"


def _default_sampler(grid: GridMap) -> Sampler:
    return lambda rng: sampling.sample_uniform_free(grid, rng)


def _trivial_result(query: PlanningQuery, t0: float) -> PlanResult:
    path = PlanPath.from_waypoints([query.start])
    return PlanResult(
        tree=Tree(query.start),
        initial_path=path,
        best_path=path,
        iterations_used=0,
        nodes_at_first_solution=1,
        wall_time=time.perf_counter() - t0,
    )


def rrt_plan(
    grid: GridMap,
    query: PlanningQuery,
    cfg: PlannerConfig,
    rng: np.random.Generator,
    sampler: Sampler | None = None,
) -> PlanResult:
    """Plain RRT: grow until the first vertex lands in the goal region."""
    t0 = time.perf_counter()
    validate_query(grid, query)
    if sampler is None:
        sampler = _default_sampler(grid)
    gx, gy = query.goal
    r2 = query.goal_radius * query.goal_radius
    sx, sy = query.start
    if (sx - gx) ** 2 + (sy - gy) ** 2 < r2:
        return _trivial_result(query, t0)

    tree = Tree(query.start)
    step = cfg.step_size
    spacing = cfg.collision_spacing
    path = None
    iterations = cfg.max_iterations
    for i in range(1, cfg.max_iterations + 1):
        x_rand = sampler(rng)
        ni = nearest(tree, x_rand)
        x_new = steer(tree.point(ni), x_rand, step)
        if not segment_obstacle_free(grid, tree.point(ni), x_new, spacing):
            continue
        d = math.hypot(x_new[0] - tree.xs[ni], x_new[1] - tree.ys[ni])
        vi = tree.add(x_new, ni, float(tree.cost[ni]) + d)
        if (x_new[0] - gx) ** 2 + (x_new[1] - gy) ** 2 < r2:
            path = PlanPath.from_waypoints(tree.path_to_root(vi))
            iterations = i
            break
    return PlanResult(
        tree=tree,
        initial_path=path,
        best_path=path,
        iterations_used=iterations,
        nodes_at_first_solution=tree.n if path is not None else None,
        wall_time=time.perf_counter() - t0,
    )


def _choose_parent(
    grid: GridMap,
    tree: Tree,
    x_new: WorldPoint,
    cand: np.ndarray,
    edge: np.ndarray,
    nearest_idx: int,
    spacing: float,
) -> tuple[int, float]:
    """Cheapest collision-free attachment among candidates; nearest is fallback.

    Candidates are tried in increasing cost-through order, so the first
    collision-free one wins; most of the time that is the very first.
    """
    through = tree.cost[cand] + edge
    k = int(np.argmin(through))
    idx = int(cand[k])
    if idx == nearest_idx or segment_obstacle_free(grid, tree.point(idx), x_new, spacing):
        return idx, float(through[k])
    blocked = through.copy()
    blocked[k] = np.inf
    for _ in range(cand.size - 1):
        k = int(np.argmin(blocked))
        idx = int(cand[k])
        if idx == nearest_idx or segment_obstacle_free(grid, tree.point(idx), x_new, spacing):
            return idx, float(through[k])
        blocked[k] = np.inf
    # Unreachable when nearest_idx is in cand, but keep the legal fallback.
    d = math.hypot(x_new[0] - tree.xs[nearest_idx], x_new[1] - tree.ys[nearest_idx])
    return nearest_idx, float(tree.cost[nearest_idx]) + d


def rrt_star_plan(
    grid: GridMap,
    query: PlanningQuery,
    cfg: PlannerConfig,
    rng: np.random.Generator,
    sampler: Sampler | None = None,
    iteration_hook: IterationHook | None = None,
) -> PlanResult:
    """RRT* (choose-parent + rewire); runs the full budget and is anytime.

    With the hybrid sampler this is the heatmap-guided planner; the two
    differ only in where samples come from.
    """
    t0 = time.perf_counter()
    validate_query(grid, query)
    if sampler is None:
        sampler = _default_sampler(grid)
    gx, gy = query.goal
    r2 = query.goal_radius * query.goal_radius
    sx, sy = query.start
    if (sx - gx) ** 2 + (sy - gy) ** 2 < r2:
        return _trivial_result(query, t0)

    tree = Tree(query.start)
    step = cfg.step_size
    radius = cfg.rewire_radius
    spacing = cfg.collision_spacing
    debug = logger.isEnabledFor(logging.DEBUG)

    goal_vertices: list[int] = []
    initial_path: PlanPath | None = None
    nodes_at_first = None

    for i in range(1, cfg.max_iterations + 1):
        x_rand = sampler(rng)
        ni = nearest(tree, x_rand)
        x_new = steer(tree.point(ni), x_rand, step)
        if segment_obstacle_free(grid, tree.point(ni), x_new, spacing):
            cand = near(tree, x_new, radius)
            dx = tree.xs[cand] - x_new[0]
            dy = tree.ys[cand] - x_new[1]
            edge = np.hypot(dx, dy)
            pi, new_cost = _choose_parent(grid, tree, x_new, cand, edge, ni, spacing)
            vi = tree.add(x_new, pi, new_cost)

            # Rewire: reattach any neighbor that becomes cheaper through x_new.
            maybe = cand[new_cost + edge < tree.cost[cand]]
            for u in maybe:
                u = int(u)
                through = new_cost + math.hypot(
                    tree.xs[u] - x_new[0], tree.ys[u] - x_new[1]
                )
                # Re-check against the live cost: earlier rewires in this
                # iteration may already have lowered it.
                if through < tree.cost[u] and segment_obstacle_free(
                    grid, x_new, tree.point(u), spacing
                ):
                    tree.reparent(u, vi, through)

            if (x_new[0] - gx) ** 2 + (x_new[1] - gy) ** 2 < r2:
                goal_vertices.append(vi)
                if initial_path is None:
                    initial_path = PlanPath.from_waypoints(tree.path_to_root(vi))
                    nodes_at_first = tree.n

        if debug and i % 1000 == 0:
            worst = tree.max_cost_incoherence()
            logger.debug("iter %d: %d vertices, cost incoherence %.3e", i, tree.n, worst)
        if iteration_hook is not None:
            best = float(tree.cost[goal_vertices].min()) if goal_vertices else None
            iteration_hook(i, tree, best)

    best_path = None
    if goal_vertices:
        gv = np.asarray(goal_vertices)
        best_vertex = int(gv[np.argmin(tree.cost[gv])])
        best_path = PlanPath.from_waypoints(tree.path_to_root(best_vertex))
        if initial_path is not None and initial_path.length < best_path.length:
            best_path = initial_path
    return PlanResult(
        tree=tree,
        initial_path=initial_path,
        best_path=best_path,
        iterations_used=cfg.max_iterations,
        nodes_at_first_solution=nodes_at_first,
        wall_time=time.perf_counter() - t0,
    )


def cgan_rrt_star_plan(
    grid: GridMap,
    query: PlanningQuery,
    cfg: PlannerConfig,
    heatmap: Heatmap,
    rng: np.random.Generator,
    sampler_cfg: SamplerConfig | None = None,
    iteration_hook: IterationHook | None = None,
) -> PlanResult:
    """Heatmap-guided RRT*: hybrid sampling over a masked heatmap distribution."""
    if sampler_cfg is None:
        sampler_cfg = SamplerConfig()
    dist = sampling.build_distribution(heatmap, grid)
    return rrt_star_plan(
        grid,
        query,
        cfg,
        rng,
        sampler=hybrid_sampler(dist, grid, sampler_cfg),
        iteration_hook=iteration_hook,
    )


def hybrid_sampler(
    dist: SamplingDistribution, grid: GridMap, cfg: SamplerConfig
) -> Sampler:
    return lambda rng: sampling.sample_hybrid(dist, grid, cfg, rng)


def nonuniform_sampler(dist: SamplingDistribution) -> Sampler:
    return lambda rng: sampling.sample_nonuniform(dist, rng)


def plan_result_to_dict(
    result: PlanResult, map_id: str, mode: str, seed: int
) -> dict:
    """JSON-ready summary of one planner run."""
    best = result.best_path
    return {
        "map_id": map_id,
        "mode": mode,
        "seed": seed,
        "iterations": result.iterations_used,
        "nodes_at_first_solution": result.nodes_at_first_solution,
        "wall_time_s": result.wall_time,
        "initial_length": result.initial_path.length if result.initial_path else None,
        "best_length": best.length if best else None,
        "waypoints": [[p.x, p.y] for p in best.waypoints] if best else None,
    }


def plan_result_to_json(result: PlanResult, map_id: str, mode: str, seed: int) -> str:
    return json.dumps(plan_result_to_dict(result, map_id, mode, seed), sort_keys=True, indent=2)


def render_plan(grid: GridMap, query: PlanningQuery, result: PlanResult) -> bytes:
    """PNG of the map with tree edges, the best path, and start/goal disks."""
    img = np.empty((grid.height, grid.width, 3), dtype=np.uint8)
    img[:] = (255, 255, 255)
    img[grid.obstacles] = (0, 0, 0)
    im = Image.fromarray(img, mode="RGB")
    draw = ImageDraw.Draw(im)
    tree = result.tree
    for v in range(1, tree.n):
        p = int(tree.parent[v])
        draw.line(
            [(tree.xs[p], tree.ys[p]), (tree.xs[v], tree.ys[v])],
            fill=COLOR_PATH_REGION,
        )
    if result.best_path is not None:
        pts = [(p.x, p.y) for p in result.best_path.waypoints]
        if len(pts) > 1:
            draw.line(pts, fill=COLOR_PLAN_PATH, width=2)
    arr = np.asarray(im).copy()
    free = ~grid.obstacles
    arr[disk_mask(grid.width, grid.height, query.start, MARKER_RADIUS) & free] = COLOR_START
    arr[disk_mask(grid.width, grid.height, query.goal, MARKER_RADIUS) & free] = COLOR_GOAL
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
