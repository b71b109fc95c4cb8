"""Forward pass: expected state visitation frequencies under a policy.

Unit mass starts at the start state and is pushed through the policy and
the deterministic transitions for n_steps steps. Occupancy is accumulated
per step before mass sitting on the goal is removed, so reaching the goal
is counted once and then absorbed (no mass propagates out of the goal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ACTIONS, GridSpec, State
from .planner import Policy
from .reward import wall_mask


@dataclass
class VisitationField:
    """Summed visitation frequencies; per_step holds the per-step fields when kept."""

    d: np.ndarray
    per_step: np.ndarray | None = None


def push_mass(d: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """One transition step: move each cell's mass along its action distribution."""
    h, w = d.shape
    out = np.zeros_like(d)
    buf = np.empty_like(d)
    for i, a in enumerate(ACTIONS):
        np.multiply(probs[:, :, i], d, out=buf)
        dx, dy = a
        src_y = slice(max(0, -dy), h - max(0, dy))
        src_x = slice(max(0, -dx), w - max(0, dx))
        dst_y = slice(max(0, dy), h - max(0, -dy))
        dst_x = slice(max(0, dx), w - max(0, -dx))
        # clamped moves stay put: cells outside the src window (a border
        # band per exiting axis) contribute at their own position
        m = wall_mask(d.shape, a)
        out[m] += buf[m]
        out[dst_y, dst_x] += buf[src_y, src_x]
    return out


def forward_pass(
    policy: Policy,
    spec: GridSpec,
    start: State,
    goal: State,
    n_steps: int,
    keep_steps: bool = False,
) -> VisitationField:
    """Propagate visitation mass for n_steps steps.

    n_steps is normally the state count of the trajectory or gap being
    matched. The returned field sums the first n_steps per-step occupancy
    snapshots; each snapshot is taken before the goal's mass is zeroed for
    the following push.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if not spec.contains_state(start) or not spec.contains_state(goal):
        raise ValueError("start/goal outside grid")

    if spec.time_augmented:
        return _forward_time_layered(policy, spec, start, goal, n_steps, keep_steps)

    d = np.zeros(spec.shape)
    d[start.y, start.x] = 1.0
    total = np.zeros(spec.shape)
    steps = [] if keep_steps else None
    for _ in range(n_steps):
        total += d
        if keep_steps:
            steps.append(d.copy())
        d[goal.y, goal.x] = 0.0  # snapshot already taken; absorb before the push
        d = push_mass(d, policy.probs)
    return VisitationField(d=total, per_step=np.stack(steps) if keep_steps else None)


def _forward_time_layered(
    policy: Policy,
    spec: GridSpec,
    start: State,
    goal: State,
    n_steps: int,
    keep_steps: bool,
) -> VisitationField:
    """Time-augmented variant: mass at layer z moves to layer z+1 each step."""
    if start.z is None or goal.z is None:
        raise ValueError("time-augmented mode needs states with z set")
    n_layers = spec.horizon
    cube = np.zeros((n_layers,) + spec.shape)
    d = np.zeros(spec.shape)
    d[start.y, start.x] = 1.0
    z = start.z
    steps = [] if keep_steps else None
    for _ in range(n_steps):
        cube[z] += d
        if keep_steps:
            layer = np.zeros((n_layers,) + spec.shape)
            layer[z] = d
            steps.append(layer)
        if z == goal.z:
            d = d.copy()
            d[goal.y, goal.x] = 0.0
        if z + 1 >= n_layers:
            break
        d = push_mass(d, policy.probs[z])
        z += 1
    return VisitationField(d=cube, per_step=np.stack(steps) if keep_steps else None)
