"""Command-line front end.

Subcommands: gen-maps, gen-dataset, plan, benchmark, eval-heatmap, render.
Exit codes: 0 success, 1 usage error (including invalid config overrides),
2 runtime error. All randomness hangs off --seed; wall-clock fields are the
only nondeterministic outputs. HEATMAP_RRT_LOG in {error, info, debug}
controls logging.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from . import dataset, evaluation, gridworld, planners, sampling

logger = logging.getLogger(__name__)

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise _UsageError(message)


def _configure_logging() -> None:
    level = os.environ.get("HEATMAP_RRT_LOG", "info").lower()
    if level not in _LOG_LEVELS:
        raise _UsageError(f"HEATMAP_RRT_LOG must be one of {sorted(_LOG_LEVELS)}, got {level!r}")
    logging.basicConfig(level=_LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s")


def _planner_config(args, mode: str) -> planners.PlannerConfig:
    try:
        return planners.PlannerConfig(
            step_size=args.step,
            max_iterations=args.iters,
            rewire_radius=args.rewire_radius,
            collision_spacing=args.spacing,
            mode=mode,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _sampler_config(args) -> sampling.SamplerConfig:
    try:
        return sampling.SamplerConfig(mix_probability=args.mix, rng_seed=args.seed)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _add_planner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iters", type=int, default=10000, help="iteration budget")
    p.add_argument("--step", type=float, default=6.0, help="steer step size (cells)")
    p.add_argument("--rewire-radius", type=float, default=12.0)
    p.add_argument("--spacing", type=float, default=0.5, help="collision sample spacing")
    p.add_argument("--mix", type=float, default=0.5, help="nonuniform sampling probability")


def _load_map(path: str) -> gridworld.GridMap:
    grid, _ = gridworld.decode_map_image(Path(path).read_bytes())
    return grid


def _load_query(path: str) -> gridworld.PlanningQuery:
    _, query = gridworld.read_map_sidecar(path)
    return query


def _cmd_gen_maps(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kinds = args.kinds.split(",")
    for kind in kinds:
        if kind not in gridworld.MAP_KINDS:
            raise _UsageError(f"unknown map kind {kind!r}")
    for i in range(args.count):
        kind = kinds[i % len(kinds)]
        seed = args.seed + i
        grid = gridworld.generate_random_map(kind, args.width, args.height, seed=seed)
        query = dataset._place_query(grid, np.random.default_rng(seed), args.goal_radius)
        if query is None:
            logger.info("map %d: no separated query found; writing map without one", i)
            data = gridworld.encode_map_image(grid)
        else:
            data = gridworld.encode_map_image(grid, query)
        stem = out / f"map_{i:04d}"
        stem.with_suffix(".png").write_bytes(data)
        if query is not None:
            gridworld.write_map_sidecar(stem.with_suffix(".json"), grid, query, map_id=stem.name)
    print(f"wrote {args.count} maps to {out}")
    return 0


def _cmd_gen_dataset(args) -> int:
    kinds = tuple(args.kinds.split(","))
    for kind in kinds:
        if kind not in gridworld.MAP_KINDS:
            raise _UsageError(f"unknown map kind {kind!r}")
    manifest = dataset.generate_dataset(
        n_pairs=args.pairs,
        kinds=kinds,
        base_seed=args.seed,
        out_dir=args.out,
        width=args.width,
        height=args.height,
        k=args.paths_per_map,
        budget=args.budget,
        goal_radius=args.goal_radius,
        jobs=args.jobs,
    )
    print(f"wrote {len(manifest['pairs'])} pairs to {args.out}")
    return 0


def _cmd_plan(args) -> int:
    grid = _load_map(args.map)
    query = _load_query(args.query)
    cfg = _planner_config(args, args.mode)
    rng = np.random.default_rng(args.seed)
    if args.mode == "heatmap_rrt_star":
        if not args.heatmap:
            raise _UsageError("--heatmap is required for heatmap_rrt_star mode")
        raw = Path(args.heatmap).read_bytes()
        heat = dataset.heatmap_from_image(raw)
        result = planners.cgan_rrt_star_plan(
            grid, query, cfg, heat, rng, sampler_cfg=_sampler_config(args)
        )
    elif args.mode == "rrt_star":
        result = planners.rrt_star_plan(grid, query, cfg, rng)
    else:
        result = planners.rrt_plan(grid, query, cfg, rng)
    map_id = Path(args.map).stem
    text = planners.plan_result_to_json(result, map_id, args.mode, args.seed) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.render:
        Path(args.render).write_bytes(planners.render_plan(grid, query, result))
    solved = result.best_path is not None
    logger.info("plan %s: %s", map_id, "solved" if solved else "no path")
    return 0


def _benchmark_cases(dataset_dir: Path, heatmap_dir: Path | None, limit: int | None):
    manifest = json.loads((dataset_dir / "manifest.json").read_text())
    entries = manifest["pairs"][:limit] if limit else manifest["pairs"]
    cases = []
    for entry in entries:
        pid = entry["id"]
        maps_dir = dataset_dir / "maps"
        grid = _load_map(str(maps_dir / f"{pid}_input.png"))
        _, query = gridworld.read_map_sidecar(maps_dir / f"{pid}.json")
        heat_path = (
            (heatmap_dir / f"{pid}_heat.png") if heatmap_dir else maps_dir / f"{pid}_heat.png"
        )
        cases.append(
            evaluation.BenchmarkCase(
                map_id=pid, grid=grid, query=query, heatmap=None, heatmap_path=heat_path
            )
        )
    return cases


def _cmd_benchmark(args) -> int:
    cases = _benchmark_cases(
        Path(args.dataset), Path(args.heatmap_dir) if args.heatmap_dir else None, args.limit
    )
    specs = []
    for name in args.planners.split(","):
        if name not in planners.PLANNER_MODES:
            raise _UsageError(f"unknown planner {name!r}")
        specs.append(
            evaluation.PlannerSpec(
                name=name,
                config=_planner_config(args, name),
                sampler=_sampler_config(args) if name == "heatmap_rrt_star" else None,
            )
        )
    records, errors, summary = evaluation.run_benchmark(
        cases, specs, trials=args.trials, base_seed=args.seed, jobs=args.jobs
    )
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    prefix.with_suffix(".csv").write_bytes(evaluation.emit_report(records, "csv"))
    prefix.with_name(prefix.name + "_summary.json").write_bytes(
        evaluation.emit_report(records, "json")
    )
    print(f"{len(records)} records, {len(errors)} errors -> {prefix}.csv")
    return 0


def _cmd_eval_heatmap(args) -> int:
    dataset_dir = Path(args.dataset)
    heatmap_dir = Path(args.heatmap_dir) if args.heatmap_dir else None
    manifest = json.loads((dataset_dir / "manifest.json").read_text())
    entries = manifest["pairs"][: args.limit] if args.limit else manifest["pairs"]
    verdicts = []
    for entry in entries:
        pid = entry["id"]
        maps_dir = dataset_dir / "maps"
        grid = _load_map(str(maps_dir / f"{pid}_input.png"))
        _, query = gridworld.read_map_sidecar(maps_dir / f"{pid}.json")
        heat_path = (
            (heatmap_dir / f"{pid}_heat.png") if heatmap_dir else maps_dir / f"{pid}_heat.png"
        )
        try:
            heat = dataset.heatmap_from_image(heat_path.read_bytes())
            verdict = evaluation.connectivity_test(
                grid, query, heat, budget=args.budget, pair_id=pid, seed=args.seed
            )
        except (FileNotFoundError, sampling.EmptyDistributionError) as exc:
            logger.warning("pair %s: %s", pid, exc)
            verdict = evaluation.ConnectivityVerdict(pid, False, 0, 0.0)
        verdicts.append(verdict)
    payload = {
        "pairs": [
            {
                "id": v.pair_id,
                "success": v.success,
                "rrt_iterations_used": v.rrt_iterations_used,
                "restricted_free_fraction": v.restricted_free_fraction,
            }
            for v in verdicts
        ],
        "success_rate": (
            sum(v.success for v in verdicts) / len(verdicts) if verdicts else None
        ),
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_render(args) -> int:
    grid = _load_map(args.map)
    query = _load_query(args.query) if args.query else None
    path_mask = None
    if args.heatmap:
        heat = dataset.heatmap_from_image(Path(args.heatmap).read_bytes())
        path_mask = heat.weights > 0
    data = gridworld.encode_map_image(grid, query, path_mask=path_mask)
    if args.plan:
        plan = json.loads(Path(args.plan).read_text())
        if plan.get("waypoints"):
            im = Image.open(io.BytesIO(data)).convert("RGB")
            draw = ImageDraw.Draw(im)
            pts = [(x, y) for x, y in plan["waypoints"]]
            if len(pts) > 1:
                draw.line(pts, fill=planners.COLOR_PLAN_PATH, width=2)
            buf = io.BytesIO()
            im.save(buf, format="PNG")
            data = buf.getvalue()
    Path(args.out).write_bytes(data)
    print(f"rendered {args.out}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="heatmap-rrt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-maps", help="generate random occupancy maps")
    p.add_argument("--kinds", default="blocks,gaps,clutter")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--goal-radius", type=float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_maps)

    p = sub.add_parser("gen-dataset", help="generate a training corpus")
    p.add_argument("--pairs", type=int, required=True)
    p.add_argument("--kinds", default="blocks,gaps,clutter")
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--paths-per-map", type=int, default=dataset.DEFAULT_PATHS_PER_MAP)
    p.add_argument("--budget", type=int, default=dataset.DEFAULT_RRT_BUDGET)
    p.add_argument("--goal-radius", type=float, default=6.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_dataset)

    p = sub.add_parser("plan", help="run one planner on a map image")
    p.add_argument("--mode", choices=planners.PLANNER_MODES, required=True)
    p.add_argument("--map", required=True, help="map PNG")
    p.add_argument("--query", required=True, help="map JSON sidecar")
    p.add_argument("--heatmap", help="heatmap PNG (heatmap_rrt_star mode)")
    _add_planner_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="result JSON path (default: stdout)")
    p.add_argument("--render", help="optional tree/path PNG")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("benchmark", help="compare planners over a dataset")
    p.add_argument("--dataset", required=True, help="dataset dir with manifest.json")
    p.add_argument("--heatmap-dir", help="trainer-emitted heatmaps (default: ground truth)")
    p.add_argument("--planners", default="rrt_star,heatmap_rrt_star")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--limit", type=int, help="use only the first N pairs")
    _add_planner_flags(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("eval-heatmap", help="connectivity test over a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--heatmap-dir", help="predicted heatmaps (default: ground truth)")
    p.add_argument("--budget", type=int, default=evaluation.DEFAULT_CONNECTIVITY_BUDGET)
    p.add_argument("--limit", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="verdict JSON path (default: stdout)")
    p.set_defaults(func=_cmd_eval_heatmap)

    p = sub.add_parser("render", help="re-render artifacts to PNG")
    p.add_argument("--map", required=True)
    p.add_argument("--query")
    p.add_argument("--heatmap")
    p.add_argument("--plan", help="plan result JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)
    return parser


def main(argv=None) -> int:
    try:
        _configure_logging()
        parser = _build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures map to exit code 2
        logger.error("%s: %s", type(exc).__name__, exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
