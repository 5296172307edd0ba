#!/usr/bin/env python3
"""Paired heatmap-guided vs uniform RRT* comparison on four structured maps.

Builds the benchmark worlds (two single-door wall courses, a clutter field,
and a U-trap), accumulates an oracle heatmap from RRT paths for each, then
runs both planners with shared per-trial seeds and reports medians and
paired win rates. Writes CSV, summary JSON, and per-map renders.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from heatmap_rrt.dataset import ground_truth_heatmap
from heatmap_rrt.evaluation import BenchmarkCase, PlannerSpec, emit_report, run_benchmark
from heatmap_rrt.gridworld import GridMap, PlanningQuery, WorldPoint, encode_map_image
from heatmap_rrt.planners import PlannerConfig
from heatmap_rrt.sampling import SamplerConfig


def build(rects, size=256):
    obs = np.zeros((size, size), dtype=bool)
    for x0, y0, x1, y1 in rects:
        obs[y0:y1, x0:x1] = True
    return GridMap(size, size, obs)


def benchmark_worlds():
    from heatmap_rrt.gridworld import generate_random_map

    m1 = build([(0, 80, 120, 88), (134, 80, 256, 88), (0, 168, 108, 176), (122, 168, 256, 176)])
    m2 = build([(120, 0, 128,110), (120, 124, 128, 256), (40, 180, 200, 188)])
    m3 = generate_random_map("clutter", 256, 256, seed=12)
    m4 = build([(60, 60, 196, 68), (60, 68, 68, 180), (188, 68, 196, 180)])
    return [
        ("double_gap", m1, PlanningQuery(WorldPoint(128, 20), WorldPoint(128, 240), 6.0)),
        ("door_slab", m2, PlanningQuery(WorldPoint(30, 40), WorldPoint(230, 230), 6.0)),
        ("clutter", m3, PlanningQuery(WorldPoint(20.5, 20.5), WorldPoint(240.5, 243.5), 6.0)),
        ("u_trap", m4, PlanningQuery(WorldPoint(128, 100), WorldPoint(128, 30), 6.0)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--iters", type=int, default=9000)
    ap.add_argument("--gt-paths", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("benchmark_out"))
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    cases = []
    for i, (name, grid, query) in enumerate(benchmark_worlds()):
        heat, found = ground_truth_heatmap(
            grid, query, k=args.gt_paths, budget=12_000, base_seed=900 + i
        )
        print(f"{name}: {found}/{args.gt_paths} oracle paths")
        cases.append(BenchmarkCase(map_id=name, grid=grid, query=query, heatmap=heat))
        (args.out / f"{name}.png").write_bytes(
            encode_map_image(grid, query, path_mask=heat.weights > 0)
        )

    planners = [
        PlannerSpec("rrt_star", PlannerConfig(max_iterations=args.iters, mode="rrt_star")),
        PlannerSpec(
            "heatmap_rrt_star",
            PlannerConfig(max_iterations=args.iters, mode="heatmap_rrt_star"),
            SamplerConfig(),
        ),
    ]
    records, errors, summary = run_benchmark(cases, planners, args.trials, args.seed)
    (args.out / "records.csv").write_bytes(emit_report(records, "csv"))
    (args.out / "summary.json").write_bytes(emit_report(records, "json"))
    print(json.dumps(summary["paired"], indent=2))
    if errors:
        print(f"{len(errors)} cells failed")


if __name__ == "__main__":
    main()
