"""Heatmap connectivity test and the planner comparison harness.

The connectivity test re-plans with plain RRT inside the heatmap's support
(plus forced start/goal disks) to certify that a predicted region actually
links start to goal. The benchmark harness runs (map, planner, trial) cells
with paired seeds so heatmap-guided and uniform planners can be compared
trial by trial.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gridworld import GridMap, MARKER_RADIUS, PlanningQuery, disk_mask
from .planners import (
    PlannerConfig,
    PlanPath,
    cgan_rrt_star_plan,
    rrt_plan,
    rrt_star_plan,
)
from .sampling import EmptyDistributionError, Heatmap, SamplerConfig, load_heatmap

logger = logging.getLogger(__name__)

DEFAULT_CONNECTIVITY_BUDGET = 5000

CSV_HEADER = ["map_id", "planner", "seed", "time_cost_s", "node_count", "initial_len", "optimal_len"]


@dataclass(frozen=True)
class ConnectivityVerdict:
    pair_id: str
    success: bool
    rrt_iterations_used: int
    restricted_free_fraction: float
    path: PlanPath | None = None


@dataclass(frozen=True)
class BenchmarkRecord:
    map_id: str
    planner: str
    seed: int
    time_cost_s: float
    node_count: int
    initial_path_length: float | None
    optimal_path_length: float | None

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        for v in (self.initial_path_length, self.optimal_path_length):
            if v is not None and not (v > 0):
                raise ValueError("path lengths must be positive when present")


@dataclass(frozen=True)
class BenchmarkCase:
    """One benchmark map: grid + query + the heatmap a guided planner uses.

    ``heatmap`` holds an in-memory oracle heatmap (ground truth); in model
    mode ``heatmap_path`` points at a trainer-emitted exchange file instead.
    """

    map_id: str
    grid: GridMap
    query: PlanningQuery
    heatmap: Heatmap | None = None
    heatmap_path: Path | None = None


@dataclass(frozen=True)
class PlannerSpec:
    name: str
    config: PlannerConfig
    sampler: SamplerConfig | None = None  # heatmap planners only


def restricted_map(grid: GridMap, query: PlanningQuery, heatmap: Heatmap) -> GridMap | None:
    """Free space reduced to the heatmap support plus start/goal disks.

    Never frees an original obstacle cell; returns None if nothing is left.
    """
    support = heatmap.weights > 0
    support = support | disk_mask(grid.width, grid.height, query.start, MARKER_RADIUS)
    support = support | disk_mask(grid.width, grid.height, query.goal, MARKER_RADIUS)
    free = support & ~grid.obstacles
    if not free.any():
        return None
    return GridMap(
        width=grid.width,
        height=grid.height,
        obstacles=~free,
        map_kind="restricted",
        seed=grid.seed,
    )


def connectivity_test(
    grid: GridMap,
    query: PlanningQuery,
    heatmap: Heatmap,
    budget: int = DEFAULT_CONNECTIVITY_BUDGET,
    pair_id: str = "",
    seed: int = 0,
) -> ConnectivityVerdict:
    """Plan with RRT inside the heatmap support; success iff a path is found."""
    if (heatmap.width, heatmap.height) != (grid.width, grid.height):
        raise ValueError("heatmap dimensions do not match the map")
    sub = restricted_map(grid, query, heatmap)
    n_free_orig = grid.n_free
    if sub is None:
        return ConnectivityVerdict(pair_id, False, 0, 0.0)
    fraction = sub.n_free / n_free_orig
    cfg = PlannerConfig(max_iterations=budget, mode="rrt")
    try:
        result = rrt_plan(sub, query, cfg, np.random.default_rng(seed))
    except ValueError:
        # Start or goal fell outside the restricted space entirely.
        return ConnectivityVerdict(pair_id, False, 0, fraction)
    return ConnectivityVerdict(
        pair_id,
        result.initial_path is not None,
        result.iterations_used,
        fraction,
        path=result.initial_path,
    )


def _run_cell(case: BenchmarkCase, spec: PlannerSpec, seed: int) -> BenchmarkRecord:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    mode = spec.config.mode
    if mode == "heatmap_rrt_star":
        # Heatmap load/build time is part of the cost, mirroring how model
        # inference time is charged to the guided planner.
        heat = case.heatmap
        if heat is None:
            if case.heatmap_path is None:
                raise FileNotFoundError(f"no heatmap available for map {case.map_id}")
            heat = load_heatmap(case.heatmap_path)
        result = cgan_rrt_star_plan(
            case.grid, case.query, spec.config, heat, rng, sampler_cfg=spec.sampler
        )
    elif mode == "rrt_star":
        result = rrt_star_plan(case.grid, case.query, spec.config, rng)
    else:
        result = rrt_plan(case.grid, case.query, spec.config, rng)
    elapsed = time.perf_counter() - t0
    solved = result.initial_path is not None
    return BenchmarkRecord(
        map_id=case.map_id,
        planner=spec.name,
        seed=seed,
        time_cost_s=elapsed,
        node_count=result.nodes_at_first_solution if solved else result.tree.n,
        initial_path_length=result.initial_path.length if solved else None,
        optimal_path_length=result.best_path.length if result.best_path else None,
    )


def _cell_task(args):
    case, spec, seed = args
    try:
        return _run_cell(case, spec, seed)
    except (FileNotFoundError, EmptyDistributionError, ValueError) as exc:
        return (case.map_id, spec.name, seed, f"{type(exc).__name__}: {exc}")


def run_benchmark(
    cases: list[BenchmarkCase],
    planners: list[PlannerSpec],
    trials: int,
    base_seed: int,
    jobs: int = 1,
) -> tuple[list[BenchmarkRecord], list[tuple], dict]:
    """Run every (map, planner, trial) cell and summarize.

    Trial seeds are shared across planners (base_seed ^ trial mixing with the
    map index) so per-trial pairings are meaningful. Failed cells are
    collected as errors and do not abort the run.
    """
    if not cases or not planners or trials < 1:
        raise ValueError("need at least one map, one planner, and one trial")
    tasks = []
    for mi, case in enumerate(cases):
        for trial in range(trials):
            seed = (base_seed ^ (trial + 1)) + 7919 * mi
            for spec in planners:
                tasks.append((case, spec, seed))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_cell_task, tasks))
    else:
        outcomes = [_cell_task(t) for t in tasks]
    records = [o for o in outcomes if isinstance(o, BenchmarkRecord)]
    errors = [o for o in outcomes if not isinstance(o, BenchmarkRecord)]
    for err in errors:
        logger.warning("benchmark cell failed: %s", err)
    records.sort(key=lambda r: (r.map_id, r.planner, r.seed))
    return records, errors, summarize(records)


def _median(values) -> float | None:
    vals = [v for v in values if v is not None]
    return float(np.median(vals)) if vals else None


def summarize(records: list[BenchmarkRecord]) -> dict:
    """Per-(map, planner) medians plus the paired heatmap-vs-uniform win rates."""
    cells: dict[tuple[str, str], list[BenchmarkRecord]] = {}
    for r in records:
        cells.setdefault((r.map_id, r.planner), []).append(r)
    per_cell = [
        {
            "map": map_id,
            "planner": planner,
            "median_time": _median(r.time_cost_s for r in rs),
            "median_nodes": _median(r.node_count for r in rs),
            "median_init_len": _median(r.initial_path_length for r in rs),
            "median_opt_len": _median(r.optimal_path_length for r in rs),
        }
        for (map_id, planner), rs in sorted(cells.items())
    ]

    planner_names = sorted({r.planner for r in records})
    heat_names = [n for n in planner_names if "heatmap" in n]
    uni_names = [n for n in planner_names if "heatmap" not in n]
    paired = {"win_rate_nodes": None, "win_rate_init_len": None, "n_pairs": 0}
    if heat_names and uni_names:
        heat, uni = heat_names[0], uni_names[0]
        by_key = {(r.map_id, r.seed, r.planner): r for r in records}
        keys = sorted({(r.map_id, r.seed) for r in records})
        node_wins = len_wins = n = 0
        for key in keys:
            a = by_key.get((*key, heat))
            b = by_key.get((*key, uni))
            if a is None or b is None:
                continue
            if a.initial_path_length is None and b.initial_path_length is None:
                continue
            n += 1
            a_solved = a.initial_path_length is not None
            b_solved = b.initial_path_length is not None
            if a_solved and (not b_solved or a.node_count < b.node_count):
                node_wins += 1
            if a_solved and (not b_solved or a.initial_path_length < b.initial_path_length):
                len_wins += 1
        if n:
            paired = {
                "win_rate_nodes": node_wins / n,
                "win_rate_init_len": len_wins / n,
                "n_pairs": n,
            }
    return {"per_cell": per_cell, "paired": paired}


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def emit_report(records: list[BenchmarkRecord], format: str) -> bytes:
    """Records as CSV (fixed header, deterministic order) or a JSON summary."""
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in sorted(records, key=lambda r: (r.map_id, r.planner, r.seed)):
            writer.writerow(
                [
                    r.map_id,
                    r.planner,
                    r.seed,
                    _fmt(r.time_cost_s),
                    r.node_count,
                    _fmt(r.initial_path_length),
                    _fmt(r.optimal_path_length),
                ]
            )
        return buf.getvalue().encode()
    if format == "json":
        return (json.dumps(summarize(records), sort_keys=True, indent=2) + "\n").encode()
    raise ValueError(f"unknown report format {format!r}; expected 'csv' or 'json'")


def parse_report_csv(data: bytes) -> list[BenchmarkRecord]:
    rows = list(csv.reader(io.StringIO(data.decode())))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError("missing or malformed CSV header")
    out = []
    for row in rows[1:]:
        out.append(
            BenchmarkRecord(
                map_id=row[0],
                planner=row[1],
                seed=int(row[2]),
                time_cost_s=float(row[3]),
                node_count=int(row[4]),
                initial_path_length=float(row[5]) if row[5] else None,
                optimal_path_length=float(row[6]) if row[6] else None,
            )
        )
    return out
