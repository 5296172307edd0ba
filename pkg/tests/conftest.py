"""Shared test fixtures and map-building helpers."""

from __future__ import annotations

import numpy as np
import pytest

from heatmap_rrt.gridworld import GridMap, PlanningQuery, WorldPoint
from heatmap_rrt.sampling import Heatmap


def rect_map(
    rects: list[tuple[int, int, int, int]],
    width: int = 64,
    height: int = 64,
    kind: str = "custom",
) -> GridMap:
    """Map whose obstacles are the given (x0, y0, x1, y1) cell rectangles."""
    obs = np.zeros((height, width), dtype=bool)
    for x0, y0, x1, y1 in rects:
        obs[y0:y1, x0:x1] = True
    return GridMap(width, height, obs, map_kind=kind)


def corridor_map(width: int = 64, height: int = 64, band: tuple[int, int] = (28, 36)) -> GridMap:
    """Everything blocked except one horizontal band: a single-passage world."""
    obs = np.ones((height, width), dtype=bool)
    obs[band[0] : band[1], :] = False
    return GridMap(width, height, obs, map_kind="custom")


def walled_goal_map(width: int = 64, height: int = 64) -> tuple[GridMap, PlanningQuery]:
    """Goal sealed inside a solid-walled box: unsolvable query."""
    obs = np.zeros((height, width), dtype=bool)
    obs[40:54, 40:54] = True
    obs[44:50, 44:50] = False  # free pocket inside solid wall
    grid = GridMap(width, height, obs)
    query = PlanningQuery(WorldPoint(5.0, 5.0), WorldPoint(47.0, 47.0), 2.0)
    return grid, query


def band_heatmap(grid: GridMap, y0: int, y1: int, x0: int = 0, x1: int | None = None) -> Heatmap:
    """Unit-weight heatmap over a rectangular band (pre-masking)."""
    w = np.zeros((grid.height, grid.width), dtype=np.float64)
    w[y0:y1, x0 : x1 if x1 is not None else grid.width] = 1.0
    return Heatmap(width=grid.width, height=grid.height, weights=w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
