"""Independent reference computations used only by the tests."""

import heapq
import math

import numpy as np

from gridirl import ACTIONS, GridSpec, State, successor


def dijkstra_cost(spec: GridSpec, goal: State, step_cost) -> np.ndarray:
    """Cheapest cost-to-goal per cell, step_cost(s, s_next) -> float >= 0."""
    dist = np.full(spec.shape, np.inf)
    dist[goal.y, goal.x] = 0.0
    heap = [(0.0, goal.x, goal.y)]
    while heap:
        d, x, y = heapq.heappop(heap)
        if d > dist[y, x]:
            continue
        # relax predecessors: moving pred -> (x, y) costs step_cost(pred, here)
        for a in ACTIONS:
            px, py = x - a[0], y - a[1]
            if not spec.in_bounds(px, py):
                continue
            nd = d + step_cost(State(px, py), State(x, y))
            if nd < dist[py, px]:
                dist[py, px] = nd
                heapq.heappush(heap, (nd, px, py))
    return dist


def sampled_supercover(x0, y0, x1, y1, n_samples=200_000):
    """Cells visited by the segment, by dense parameter sampling."""
    ts = np.linspace(0.0, 1.0, n_samples)
    xs = np.floor(x0 + ts * (x1 - x0)).astype(int)
    ys = np.floor(y0 + ts * (y1 - y0)).astype(int)
    cells = [(int(xs[0]), int(ys[0]))]
    for x, y in zip(xs[1:], ys[1:]):
        if (x, y) != cells[-1]:
            cells.append((int(x), int(y)))
    return cells


def direct_convolution(field, weights, radius):
    """Nested-loop reflect-padded convolution over finite entries."""
    h, w = field.shape
    out = np.empty_like(field)
    for y in range(h):
        for x in range(w):
            num = 0.0
            den = 0.0
            for i in range(-radius, radius + 1):
                for j in range(-radius, radius + 1):
                    yy = y + i
                    xx = x + j
                    # reflect indexing (numpy 'reflect', no edge repeat)
                    if yy < 0:
                        yy = -yy
                    if yy >= h:
                        yy = 2 * (h - 1) - yy
                    if xx < 0:
                        xx = -xx
                    if xx >= w:
                        xx = 2 * (w - 1) - xx
                    v = field[yy, xx]
                    wgt = weights[i + radius, j + radius]
                    if math.isfinite(v):
                        num += wgt * v
                        den += wgt * 1.0
            out[y, x] = num / den if den > 0 else -np.inf
    return out
