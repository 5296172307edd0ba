"""Ground-truth heatmap accumulation and corpus generation."""

import io
import json

import numpy as np
import pytest
from PIL import Image

from heatmap_rrt.dataset import (
    DatasetPair,
    EmptyGroundTruthError,
    generate_dataset,
    ground_truth_heatmap,
    heatmap_from_image,
    make_pair,
    rasterize_path_cells,
    render_ground_truth_image,
)
from heatmap_rrt.gridworld import (
    MARKER_RADIUS,
    PlanningQuery,
    WorldPoint,
    decode_map_image,
    disk_mask,
    empty_map,
)
from heatmap_rrt.planners import PlannerConfig, rrt_plan
from heatmap_rrt.sampling import EmptyDistributionError

from conftest import corridor_map, walled_goal_map


QUERY = PlanningQuery(WorldPoint(5.0, 32.0), WorldPoint(58.0, 32.0), 4.0)


class TestGroundTruthHeatmap:
    def test_single_path_support_is_its_stroke(self):
        grid = empty_map(64, 64)
        heat, found = ground_truth_heatmap(grid, QUERY, k=1, budget=4000, base_seed=3)
        assert found == 1
        result = rrt_plan(grid, QUERY, PlannerConfig(max_iterations=4000, mode="rrt"),
                          np.random.default_rng(3))
        stroke = rasterize_path_cells(grid, result.initial_path)
        assert np.array_equal(heat.weights > 0, stroke)
        assert heat.weights.max() == 1.0

    def test_corridor_concentrates_mass(self):
        grid = corridor_map(64, 64, band=(28, 36))
        heat, found = ground_truth_heatmap(grid, QUERY, k=50, budget=4000, base_seed=0)
        assert found >= 45
        in_band = heat.weights[28:36, :].sum()
        assert in_band / heat.weights.sum() >= 0.9

    def test_deterministic(self):
        grid = corridor_map(64, 64)
        a, fa = ground_truth_heatmap(grid, QUERY, k=5, budget=3000, base_seed=9)
        b, fb = ground_truth_heatmap(grid, QUERY, k=5, budget=3000, base_seed=9)
        assert fa == fb
        assert np.array_equal(a.weights, b.weights)

    def test_unsolvable_raises(self):
        grid, query = walled_goal_map()
        with pytest.raises(EmptyGroundTruthError):
            ground_truth_heatmap(grid, query, k=3, budget=500, base_seed=0)

    def test_mass_conservation(self):
        # Total accumulated mass equals the sum of per-path stroke areas.
        grid = corridor_map(64, 64)
        k, budget, seed = 10, 3000, 21
        heat, found = ground_truth_heatmap(grid, QUERY, k=k, budget=budget, base_seed=seed)
        cfg = PlannerConfig(max_iterations=budget, mode="rrt")
        expected = 0
        for j in range(k):
            res = rrt_plan(grid, QUERY, cfg, np.random.default_rng(seed + j))
            if res.initial_path is not None:
                expected += int(rasterize_path_cells(grid, res.initial_path).sum())
        assert int(heat.weights.sum()) == expected

    def test_support_never_on_obstacles(self):
        grid = corridor_map(64, 64)
        heat, _ = ground_truth_heatmap(grid, QUERY, k=8, budget=3000, base_seed=2)
        assert not ((heat.weights > 0) & grid.obstacles).any()


class TestRenderAndExtract:
    def _pair(self):
        grid = corridor_map(64, 64)
        heat, found = ground_truth_heatmap(grid, QUERY, k=8, budget=3000, base_seed=5)
        return DatasetPair(grid, QUERY, heat, found)

    def test_render_round_trip_iou(self):
        pair = self._pair()
        extracted = heatmap_from_image(render_ground_truth_image(pair))
        # Start/goal disks are painted over the support, so exclude them from
        # both sides of the comparison.
        disks = disk_mask(64, 64, QUERY.start, MARKER_RADIUS) | disk_mask(
            64, 64, QUERY.goal, MARKER_RADIUS
        )
        a = (pair.ground_truth.weights > 0) & ~disks
        b = (extracted.weights > 0) & ~disks
        iou = (a & b).sum() / (a | b).sum()
        assert iou >= 0.99

    def test_render_decodes_as_map(self):
        pair = self._pair()
        grid, query = decode_map_image(render_ground_truth_image(pair))
        assert grid.cells_equal(pair.grid)
        assert query is not None

    def test_paper_scale_image_dims(self):
        # One 256x256 pair mirrors the nominal training-image shape.
        grid = corridor_map(256, 256, band=(120, 140))
        query = PlanningQuery(WorldPoint(10, 130), WorldPoint(245, 130), 6.0)
        heat, found = ground_truth_heatmap(grid, query, k=3, budget=8000, base_seed=1)
        img = Image.open(io.BytesIO(render_ground_truth_image(DatasetPair(grid, query, heat, found))))
        assert img.size == (256, 256) and img.mode == "RGB"


class TestHeatmapFromImage:
    def test_pure_green_pixel(self):
        arr = np.full((16, 16, 3), 255, dtype=np.uint8)
        arr[3, 4] = (0, 255, 0)
        buf = io.BytesIO()
        Image.fromarray(arr, "RGB").save(buf, format="PNG")
        heat = heatmap_from_image(buf.getvalue())
        assert heat.weights[3, 4] == 255.0
        assert heat.weights.sum() == 255.0  # white pixels contribute nothing

    def test_noise_floor(self):
        arr = np.zeros((16, 16, 3), dtype=np.uint8)
        arr[:, :, 1] = 40  # faint green, below the floor
        arr[8, 8, 1] = 200
        buf = io.BytesIO()
        Image.fromarray(arr, "RGB").save(buf, format="PNG")
        heat = heatmap_from_image(buf.getvalue())
        assert (heat.weights > 0).sum() == 1

    def test_grayscale_bypasses_filter(self):
        arr = np.zeros((16, 16), dtype=np.uint8)
        arr[2, 2] = 30  # below the RGB noise floor, but grayscale is direct
        buf = io.BytesIO()
        Image.fromarray(arr, "L").save(buf, format="PNG")
        heat = heatmap_from_image(buf.getvalue())
        assert heat.weights[2, 2] == 30.0

    def test_all_zero_signals_empty(self):
        arr = np.full((16, 16, 3), 255, dtype=np.uint8)
        buf = io.BytesIO()
        Image.fromarray(arr, "RGB").save(buf, format="PNG")
        with pytest.raises(EmptyDistributionError):
            heatmap_from_image(buf.getvalue())


class TestGenerateDataset:
    def test_manifest_deterministic_and_admissible(self, tmp_path):
        kwargs = dict(
            n_pairs=4, kinds=("blocks", "gaps"), base_seed=77,
            width=64, height=64, k=6, budget=2500, goal_radius=4.0,
        )
        m1 = generate_dataset(out_dir=tmp_path / "a", **kwargs)
        m2 = generate_dataset(out_dir=tmp_path / "b", **kwargs)
        assert m1 == m2
        assert (tmp_path / "a" / "manifest.json").read_text() == (
            tmp_path / "b" / "manifest.json"
        ).read_text()
        for entry in m1["pairs"]:
            assert entry["num_paths_found"] >= 1
        # Byte-identical artifacts, not just manifests.
        for name in ("pair_00000_input.png", "pair_00001_heat.png", "pair_00002.json"):
            assert (tmp_path / "a" / "maps" / name).read_bytes() == (
                tmp_path / "b" / "maps" / name
            ).read_bytes()

    def test_all_images_decode(self, tmp_path):
        generate_dataset(
            n_pairs=2, kinds=("clutter",), base_seed=5, out_dir=tmp_path,
            width=64, height=64, k=4, budget=2500, goal_radius=4.0,
        )
        for png in (tmp_path / "maps").glob("*.png"):
            if png.name.endswith("_heat.png"):
                continue  # grayscale exchange file, not a map image
            decode_map_image(png.read_bytes())

    def test_sidecar_contract(self, tmp_path):
        generate_dataset(
            n_pairs=1, kinds=("blocks",), base_seed=3, out_dir=tmp_path,
            width=64, height=64, k=4, budget=2500, goal_radius=4.0,
        )
        meta = json.loads((tmp_path / "maps" / "pair_00000.json").read_text())
        for key in ("width", "height", "kind", "seed", "start", "goal",
                    "goal_radius", "map_id", "num_paths_found", "normalization"):
            assert key in meta

    def test_separation_rule(self, tmp_path):
        pair, _ = make_pair(("blocks",), base_seed=1, index=0, width=64, height=64,
                            k=2, budget=2500, goal_radius=4.0)
        s, g = pair.query.start, pair.query.goal
        assert np.hypot(s.x - g.x, s.y - g.y) >= 32.0

    def test_rejects_zero_pairs(self, tmp_path):
        with pytest.raises(ValueError):
            generate_dataset(0, ("blocks",), 0, tmp_path)

    def test_parallel_jobs_change_nothing(self, tmp_path):
        kwargs = dict(
            n_pairs=2, kinds=("gaps",), base_seed=9, width=64, height=64,
            k=3, budget=2500, goal_radius=4.0,
        )
        m1 = generate_dataset(out_dir=tmp_path / "serial", jobs=1, **kwargs)
        m2 = generate_dataset(out_dir=tmp_path / "parallel", jobs=2, **kwargs)
        assert m1 == m2
        for png in sorted((tmp_path / "serial" / "maps").glob("*")):
            twin = tmp_path / "parallel" / "maps" / png.name
            assert png.read_bytes() == twin.read_bytes()
