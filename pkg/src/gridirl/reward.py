"""Linear reward model over per-cell features, with the L_p step-length divisor.

The state reward is theta . f(s) with strictly negative weights, so reward
fields act as cost fields and the absorbing backward pass converges. The
transition variant divides by the L_p length of the step taken, which evens
out the advantage diagonal moves otherwise enjoy on an 8-neighbor grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .grid import ACTIONS, GridSpec, State, chebyshev


@dataclass(frozen=True)
class Theta:
    """Feature weight vector; every component finite and strictly negative."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty vector")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if not np.all(w < 0):
            raise ValueError("weights must be strictly negative")

    @classmethod
    def default(cls, n_features: int) -> "Theta":
        return cls(np.full(n_features, -1.0))

    @property
    def n(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class FeatureMap:
    """Dense per-cell feature vectors, shape (n_features, height, width).

    Every component must be finite and inside [0, 1]; loaders are expected
    to min-max scale raw channels (see dataio.scale_channel).
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 3 or v.shape[0] == 0:
            raise ValueError("values must have shape (n_features, height, width)")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature values must be finite")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("feature values must lie in [0, 1]")

    @property
    def n_features(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[1:]

    def at(self, s: State) -> np.ndarray:
        return self.values[:, s.y, s.x]

    def reward_field(self, theta: Theta) -> np.ndarray:
        """theta . f(s) for every cell, shape (height, width)."""
        if theta.n != self.n_features:
            raise DimensionMismatch(
                f"theta has {theta.n} weights, features have {self.n_features}"
            )
        return np.einsum("k,kyx->yx", theta.weights, self.values)


def constant_channel(spec: GridSpec) -> np.ndarray:
    return np.ones(spec.shape)


def goal_distance_channel(spec: GridSpec, goal: State) -> np.ndarray:
    """Euclidean distance to the goal cell, scaled to [0, 1] by the grid diagonal."""
    ys, xs = np.mgrid[0 : spec.height, 0 : spec.width]
    d = np.hypot(xs - goal.x, ys - goal.y)
    diag = np.hypot(spec.width - 1, spec.height - 1)
    return d / diag


def default_feature_map(
    spec: GridSpec,
    goal: State | None = None,
    extra_channels: np.ndarray | None = None,
) -> FeatureMap:
    """Constant channel, optional goal-distance channel, optional raster channels."""
    chans = [constant_channel(spec)]
    if goal is not None:
        chans.append(goal_distance_channel(spec, goal))
    if extra_channels is not None:
        for c in np.asarray(extra_channels, dtype=float):
            chans.append(c)
    return FeatureMap(np.stack(chans))


def validate_p(p: float | None) -> float | None:
    if p is None:
        return None
    p = float(p)
    if p < 1:
        raise ValueError("L_p norm requires p >= 1")
    return p


def dist_p(s: State, s_next: State, p: float) -> float:
    """L_p length of one grid step; self-transitions count as one axis step."""
    p = validate_p(p)
    dx = abs(s_next.x - s.x)
    dy = abs(s_next.y - s.y)
    if chebyshev(s, s_next) > 1:
        raise ValueError(f"states {s.xy} and {s_next.xy} are not 8-adjacent")
    if dx == 0 and dy == 0:
        return 1.0
    return float((dx ** p + dy ** p) ** (1.0 / p))


def state_reward(s: State, theta: Theta, features: FeatureMap) -> float:
    if theta.n != features.n_features:
        raise DimensionMismatch(
            f"theta has {theta.n} weights, features have {features.n_features}"
        )
    return float(theta.weights @ features.at(s))


def transition_reward(
    s: State,
    s_next: State,
    theta: Theta,
    features: FeatureMap,
    p: float | None = None,
) -> float:
    """Reward of taking one step: r(s) / dist_p, or plain r(s) when p is None."""
    r = state_reward(s, theta, features)
    if p is None:
        return r
    return r / dist_p(s, s_next, p)


def action_step_length(a: tuple[int, int], p: float) -> float:
    """L_p length of an in-bounds move with displacement a."""
    return float((abs(a[0]) ** p + abs(a[1]) ** p) ** (1.0 / p))


import functools


@functools.lru_cache(maxsize=256)
def _wall_mask_cached(shape: tuple[int, int], a: tuple[int, int]) -> np.ndarray:
    h, w = shape
    m = np.zeros((h, w), dtype=bool)
    dx, dy = a
    if dx > 0:
        m[:, w - 1] = True
    elif dx < 0:
        m[:, 0] = True
    if dy > 0:
        m[h - 1, :] = True
    elif dy < 0:
        m[0, :] = True
    m.setflags(write=False)
    return m


def wall_mask(shape: tuple[int, int], a: tuple[int, int]) -> np.ndarray:
    """Cells whose move a would leave the grid (self-transition there)."""
    return _wall_mask_cached(tuple(shape), tuple(a))


def per_action_reward_fields(r: np.ndarray, p: float | None) -> np.ndarray:
    """Stack of 8 reward fields, one per action, shape (8, height, width).

    With an L_p divisor, diagonal moves get r/2^(1/p) except where the move
    is clamped at a wall (a self-transition, charged as one axis step).
    """
    fields = np.empty((len(ACTIONS),) + r.shape)
    for i, a in enumerate(ACTIONS):
        if p is None:
            fields[i] = r
        else:
            d = action_step_length(a, p)
            f = r / d
            m = wall_mask(r.shape, a)
            if d != 1.0:
                f = np.where(m, r, f)
            fields[i] = f
    return fields
