"""Discretized world: grid geometry, 8-neighbor actions, deterministic transitions.

Coordinates follow (x=column, y=row) with x increasing east and y north.
Arrays over the grid are indexed ``[y, x]`` (and ``[z, y, x]`` in
time-augmented mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import HorizonExceeded, NonAdjacentJump, OutOfBounds

# Fixed action order, also used for deterministic tie-breaking: N is +y.
ACTIONS: tuple[tuple[int, int], ...] = (
    (0, 1),    # N
    (1, 1),    # NE
    (1, 0),    # E
    (1, -1),   # SE
    (0, -1),   # S
    (-1, -1),  # SW
    (-1, 0),   # W
    (-1, 1),   # NW
)
ACTION_NAMES = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")
N_ACTIONS = len(ACTIONS)


class State(NamedTuple):
    """Grid cell, optionally carrying a time layer z."""

    x: int
    y: int
    z: int | None = None

    @property
    def xy(self) -> tuple[int, int]:
        return (self.x, self.y)


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the discretized world.

    origin: continuous coordinates of the grid's lower-left corner.
    cell_size: cell edge length; a scalar or an (sx, sy) pair.
    width, height: cell counts along x and y.
    horizon: number of time layers; set only in time-augmented mode.
    """

    origin: tuple[float, float] = (0.0, 0.0)
    cell_size: tuple[float, float] = (1.0, 1.0)
    width: int = 2
    height: int = 2
    horizon: int | None = None

    def __post_init__(self):
        cs = self.cell_size
        if np.isscalar(cs):
            cs = (float(cs), float(cs))
        else:
            cs = (float(cs[0]), float(cs[1]))
        object.__setattr__(self, "cell_size", cs)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        # 1-cell-wide corridors are allowed; a single-cell world is not.
        if self.width < 1 or self.height < 1 or self.width * self.height < 2:
            raise ValueError("grid needs at least 2 cells")
        if cs[0] <= 0 or cs[1] <= 0:
            raise ValueError("cell_size must be positive")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    @property
    def time_augmented(self) -> bool:
        return self.horizon is not None

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width), the numpy shape of grid-indexed arrays."""
        return (self.height, self.width)

    def with_horizon(self, horizon: int | None) -> "GridSpec":
        return GridSpec(self.origin, self.cell_size, self.width, self.height, horizon)

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def contains_state(self, s: State) -> bool:
        if not self.in_bounds(s.x, s.y):
            return False
        if self.time_augmented:
            return s.z is not None and 0 <= s.z < self.horizon
        return True

    def cell_center(self, s: State) -> tuple[float, float]:
        """Continuous coordinates of the cell's center."""
        return (
            self.origin[0] + (s.x + 0.5) * self.cell_size[0],
            self.origin[1] + (s.y + 0.5) * self.cell_size[1],
        )


def chebyshev(a: State | tuple[int, int], b: State | tuple[int, int]) -> int:
    """Chebyshev (8-neighbor step) distance between two cells; z ignored."""
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def discretize(point: Sequence[float], spec: GridSpec) -> State:
    """Map a continuous point to the cell containing it.

    The grid covers the half-open box [origin, origin + extent); points on
    the far edge are out of bounds.
    """
    fx = (point[0] - spec.origin[0]) / spec.cell_size[0]
    fy = (point[1] - spec.origin[1]) / spec.cell_size[1]
    x = math.floor(fx)
    y = math.floor(fy)
    if not spec.in_bounds(x, y):
        raise OutOfBounds(f"point {tuple(point)} outside grid")
    return State(x, y)


def successor(s: State, a: tuple[int, int], spec: GridSpec) -> State:
    """Deterministic transition. Off-grid moves self-transition (stay put)."""
    nx, ny = s.x + a[0], s.y + a[1]
    if not spec.in_bounds(nx, ny):
        nx, ny = s.x, s.y
    if spec.time_augmented:
        if s.z is None:
            raise ValueError("time-augmented spec requires states with z")
        nz = s.z + 1
        if nz >= spec.horizon:
            raise HorizonExceeded(f"z={s.z} is the last layer before horizon {spec.horizon}")
        return State(nx, ny, nz)
    return State(nx, ny)


def supercover_line(x0: float, y0: float, x1: float, y1: float) -> list[tuple[int, int]]:
    """Cells entered by the segment (x0,y0)->(x1,y1), in continuous cell units.

    Grid traversal by incremental crossing times; at an exact corner
    crossing the path steps diagonally rather than inserting one of the
    side cells. Consecutive cells are always 8-adjacent.
    """
    cx, cy = math.floor(x0), math.floor(y0)
    ex, ey = math.floor(x1), math.floor(y1)
    cells = [(cx, cy)]
    dx = x1 - x0
    dy = y1 - y0
    step_x = 1 if dx > 0 else -1
    step_y = 1 if dy > 0 else -1
    # Parametric time at which the ray crosses the next x/y cell boundary.
    if dx != 0:
        nbx = cx + 1 if dx > 0 else cx
        t_max_x = (nbx - x0) / dx
        t_dx = abs(1.0 / dx)
    else:
        t_max_x, t_dx = math.inf, math.inf
    if dy != 0:
        nby = cy + 1 if dy > 0 else cy
        t_max_y = (nby - y0) / dy
        t_dy = abs(1.0 / dy)
    else:
        t_max_y, t_dy = math.inf, math.inf

    guard = abs(ex - cx) + abs(ey - cy) + 4
    while (cx, cy) != (ex, ey) and guard > 0:
        guard -= 1
        if math.isclose(t_max_x, t_max_y, rel_tol=0.0, abs_tol=1e-12):
            cx += step_x
            cy += step_y
            t_max_x += t_dx
            t_max_y += t_dy
        elif t_max_x < t_max_y:
            cx += step_x
            t_max_x += t_dx
        else:
            cy += step_y
            t_max_y += t_dy
        cells.append((cx, cy))
    if (cx, cy) != (ex, ey):
        cells.append((ex, ey))  # numerical fallback; neighbors by construction
    return cells


def project_trajectory(
    points: Sequence[Sequence[float]], spec: GridSpec, densify: bool = True
) -> list[State]:
    """Project continuous fixes onto a grid path with unit (8-neighbor) steps.

    Consecutive duplicate cells are collapsed. When consecutive fixes land
    in non-adjacent cells the segment between them is rasterized; with
    densify=False such jumps raise NonAdjacentJump instead.
    """
    if len(points) == 0:
        raise OutOfBounds("empty point list")
    states = [discretize(points[0], spec)]
    for i in range(1, len(points)):
        prev_pt = points[i - 1]
        s = discretize(points[i], spec)
        prev = states[-1]
        if s.xy == prev.xy:
            continue
        if chebyshev(prev, s) <= 1:
            states.append(s)
            continue
        if not densify:
            raise NonAdjacentJump(
                f"jump {prev.xy} -> {s.xy}; cell size too small for sampling rate?"
            )
        ax = (prev_pt[0] - spec.origin[0]) / spec.cell_size[0]
        ay = (prev_pt[1] - spec.origin[1]) / spec.cell_size[1]
        bx = (points[i][0] - spec.origin[0]) / spec.cell_size[0]
        by = (points[i][1] - spec.origin[1]) / spec.cell_size[1]
        for (cx, cy) in supercover_line(ax, ay, bx, by)[1:]:
            nxt = State(cx, cy)
            if nxt.xy == states[-1].xy:
                continue
            if chebyshev(states[-1], nxt) > 1:
                raise NonAdjacentJump(f"rasterization gap {states[-1].xy} -> {nxt.xy}")
            states.append(nxt)
    return states


@dataclass
class Trajectory:
    """A continuous trajectory and its grid projection.

    times carries the integer step per fix; points is an (n, 2) float array.
    states is the (collapsed) grid path; its length may differ from n.
    """

    traj_id: str
    times: np.ndarray
    points: np.ndarray
    states: list[State] = field(default_factory=list)

    @classmethod
    def from_points(
        cls,
        traj_id: str,
        times: Sequence[int],
        points: Sequence[Sequence[float]],
        spec: GridSpec,
        densify: bool = True,
    ) -> "Trajectory":
        pts = np.asarray(points, dtype=float)
        return cls(
            traj_id=str(traj_id),
            times=np.asarray(times, dtype=int),
            points=pts,
            states=project_trajectory(pts, spec, densify=densify),
        )

    @property
    def start(self) -> State:
        return self.states[0]

    @property
    def goal(self) -> State:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.states)
