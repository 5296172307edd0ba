"""Independent shortest-path oracle for rectangle-obstacle worlds.

Brute-force visibility graph over the corners of axis-aligned rectangular
obstacles plus start and goal, with Dijkstra on top. Obstacles block a
segment only when it crosses their open interior, so paths may graze corners
and slide along edges — the continuous-space infimum. Rectangles must not
merely touch each other (a shared edge leaves a measure-zero seam this model
treats as passable); keep them separated or overlapping. Deliberately
self-contained: no imports from the package under test.
"""

from __future__ import annotations

import heapq
import math

Rect = tuple[float, float, float, float]  # (x0, y0, x1, y1), open interior
Point = tuple[float, float]

_EPS = 1e-9


def _segment_hits_interior(a: Point, b: Point, rect: Rect) -> bool:
    """True iff segment a-b intersects the open interior of ``rect``.

    Liang-Barsky clipping against the rectangle shrunk by a hair, so
    boundary contact (corner grazing, edge sliding) does not count.
    """
    x0, y0, x1, y1 = rect
    x0 += _EPS
    y0 += _EPS
    x1 -= _EPS
    y1 -= _EPS
    if x0 >= x1 or y0 >= y1:
        return False
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, a[0] - x0),
        (dx, x1 - a[0]),
        (-dy, a[1] - y0),
        (dy, y1 - a[1]),
    ):
        if p == 0.0:
            if q < 0.0:
                return False  # parallel and fully outside this slab
            continue
        r = q / p
        if p < 0.0:
            if r > t1:
                return False
            t0 = max(t0, r)
        else:
            if r < t0:
                return False
            t1 = min(t1, r)
    return t1 - t0 > _EPS


def _inside_any(p: Point, rects: list[Rect]) -> bool:
    return any(
        r[0] + _EPS < p[0] < r[2] - _EPS and r[1] + _EPS < p[1] < r[3] - _EPS for r in rects
    )


def visible(a: Point, b: Point, rects: list[Rect]) -> bool:
    return not any(_segment_hits_interior(a, b, r) for r in rects)


def shortest_path_length(start: Point, goal: Point, rects: list[Rect]) -> float:
    """Exact shortest collision-free start->goal length, or inf if separated."""
    if _inside_any(start, rects) or _inside_any(goal, rects):
        return math.inf
    nodes: list[Point] = [start, goal]
    for x0, y0, x1, y1 in rects:
        for c in ((x0, y0), (x1, y0), (x0, y1), (x1, y1)):
            if not _inside_any(c, rects):
                nodes.append(c)
    n = len(nodes)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if visible(nodes[i], nodes[j], rects):
                d = math.dist(nodes[i], nodes[j])
                adj[i].append((j, d))
                adj[j].append((i, d))
    dist = [math.inf] * n
    dist[0] = 0.0
    heap = [(0.0, 0)]
    while heap:
        d, i = heapq.heappop(heap)
        if d > dist[i]:
            continue
        if i == 1:
            return d
        for j, w in adj[i]:
            nd = d + w
            if nd < dist[j]:
                dist[j] = nd
                heapq.heappush(heap, (nd, j))
    return math.inf
