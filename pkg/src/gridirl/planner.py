"""Backward pass: value iteration over the grid producing Q, V and a policy.

Three backup operators are supported:

* ``softmax``: exact log-sum-exp over the 8 action values, the soft
  Bellman backup of maximum-entropy IRL.
* ``softmax_approx``: max_a Q + log(1 + exp(min_a Q - max_a Q)), a cheap
  two-term approximation used by earlier grid forecasting implementations.
* ``max``: ordinary hard value iteration.

Values start at -inf with the goal pinned to 0 and stay pinned after every
sweep (absorbing goal). An optional Gaussian kernel blurs V between sweeps
("convolutional" value iteration); -inf cells are excluded from the blur by
renormalizing the kernel mass over finite neighbors.

In time-augmented mode (spec.horizon set) states carry a time layer and
every action advances time by one; the pass then runs exactly one sweep per
layer from the goal layer down to z=0, and Q/V/policy arrays gain a leading
z axis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .grid import ACTIONS, GridSpec, State
from .reward import FeatureMap, Theta, per_action_reward_fields, validate_p


class BackupOperator(str, enum.Enum):
    SOFTMAX = "softmax"
    SOFTMAX_APPROX = "softmax_approx"
    HARD_MAX = "max"


@dataclass(frozen=True)
class GaussianKernel:
    """Normalized (2*radius+1)^2 blur kernel."""

    radius: int
    sigma: float
    weights: np.ndarray

    @classmethod
    def make(cls, radius: int = 1, sigma: float = 1.0) -> "GaussianKernel":
        if radius < 0:
            raise ValueError("radius must be >= 0")
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        ax = np.arange(-radius, radius + 1)
        xx, yy = np.meshgrid(ax, ax)
        w = np.exp(-(xx ** 2 + yy ** 2) / (2.0 * sigma ** 2))
        w /= w.sum()
        return cls(radius=radius, sigma=sigma, weights=w)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        size = 2 * self.radius + 1
        if w.shape != (size, size):
            raise ValueError("weights shape must be (2*radius+1, 2*radius+1)")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be non-negative and sum to 1")


@dataclass
class ValueArtifacts:
    """Output of the backward pass.

    q has shape (height, width, 8) or (horizon, height, width, 8); v drops
    the action axis. converged=False means the sweep cap was hit before the
    value change fell under tol (callers may treat it as a warning).
    """

    q: np.ndarray
    v: np.ndarray
    iterations_run: int
    converged: bool


@dataclass
class Policy:
    """Row-normalized action distribution per state, shape like q."""

    probs: np.ndarray


def shifted_values(v: np.ndarray, a: tuple[int, int]) -> np.ndarray:
    """Array s with s[y, x] = v at the successor of (x, y) under action a.

    Off-grid moves self-transition, so wall cells read their own value.
    """
    dx, dy = a
    h, w = v.shape
    out = v.copy()
    dst_y = slice(max(0, -dy), h - max(0, dy))
    dst_x = slice(max(0, -dx), w - max(0, dx))
    src_y = slice(max(0, dy), h - max(0, -dy))
    src_x = slice(max(0, dx), w - max(0, -dx))
    out[dst_y, dst_x] = v[src_y, src_x]
    return out


def apply_backup(q: np.ndarray, backup: BackupOperator) -> np.ndarray:
    """Reduce the action axis of q to a value field. Rows of all -inf give -inf."""
    mx = q.max(axis=-1)
    if backup is BackupOperator.HARD_MAX:
        return mx
    finite = np.isfinite(mx)
    out = np.full(mx.shape, -np.inf)
    if not finite.any():
        return out
    if backup is BackupOperator.SOFTMAX:
        z = np.exp(q[finite] - mx[finite][..., None]).sum(axis=-1)
        out[finite] = mx[finite] + np.log(z)
        return out
    if backup is BackupOperator.SOFTMAX_APPROX:
        mn = q.min(axis=-1)
        with np.errstate(invalid="ignore"):
            diff = mn - mx
        diff = np.where(np.isnan(diff), -np.inf, diff)
        out[finite] = mx[finite] + np.log1p(np.exp(diff[finite]))
        return out
    raise ValueError(f"unknown backup operator {backup!r}")


def convolve_v(v: np.ndarray, kernel: GaussianKernel) -> np.ndarray:
    """Blur a value field, reflect-padded, skipping -inf cells.

    Kernel mass falling on -inf neighbors is renormalized over the finite
    ones; cells whose whole neighborhood is -inf stay -inf.
    """
    r = kernel.radius
    h, w = v.shape
    finite = np.isfinite(v)
    v0 = np.where(finite, v, 0.0)
    pad_v = np.pad(v0, r, mode="reflect")
    pad_f = np.pad(finite.astype(float), r, mode="reflect")
    num = np.zeros_like(v0)
    den = np.zeros_like(v0)
    for i in range(2 * r + 1):
        for j in range(2 * r + 1):
            wgt = kernel.weights[i, j]
            num += wgt * pad_v[i : i + h, j : j + w]
            den += wgt * pad_f[i : i + h, j : j + w]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = num / den
    return np.where(den > 0, out, -np.inf)


def _q_from_v(v: np.ndarray, reward_fields: np.ndarray, out: np.ndarray) -> np.ndarray:
    for i, a in enumerate(ACTIONS):
        out[:, :, i] = reward_fields[i] + shifted_values(v, a)
    return out


def _value_delta(v_old: np.ndarray, v_new: np.ndarray) -> float:
    """Max-norm change over finite entries; a changed finite set counts as inf."""
    fin_old = np.isfinite(v_old)
    fin_new = np.isfinite(v_new)
    if not np.array_equal(fin_old, fin_new):
        return np.inf
    if not fin_old.any():
        return 0.0
    return float(np.max(np.abs(v_old[fin_old] - v_new[fin_old])))


def backward_pass(
    spec: GridSpec,
    goal: State,
    theta: Theta,
    features: FeatureMap,
    p: float | None = None,
    backup: BackupOperator = BackupOperator.SOFTMAX_APPROX,
    kernel: GaussianKernel | None = None,
    max_iters: int | None = None,
    tol: float = 1e-6,
) -> ValueArtifacts:
    """Run value iteration toward an absorbing goal.

    2D mode sweeps until the value change over finite entries drops under
    tol or max_iters sweeps ran (default 10*(width+height)); the artifacts
    carry converged=False in the latter case. Time-augmented mode performs
    exactly goal.z layer sweeps and always converges.

    p selects the L_p step-length divisor on rewards (None for the plain
    state-only reward), kernel an optional inter-sweep blur of V.
    """
    if not spec.contains_state(goal):
        raise ValueError(f"goal {goal} outside grid")
    if tol <= 0:
        raise ValueError("tol must be positive")
    p = validate_p(p)
    backup = BackupOperator(backup)
    r = features.reward_field(theta)
    reward_fields = per_action_reward_fields(r, p)

    if spec.time_augmented:
        return _backward_time_layered(spec, goal, reward_fields, backup, kernel)

    if max_iters is None:
        max_iters = 10 * (spec.width + spec.height)
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")

    v = np.full(spec.shape, -np.inf)
    v[goal.y, goal.x] = 0.0
    q = np.empty(spec.shape + (len(ACTIONS),))
    sweeps = 0
    converged = False
    for _ in range(max_iters):
        _q_from_v(v, reward_fields, q)
        v_new = apply_backup(q, backup)
        if kernel is not None:
            v_new = convolve_v(v_new, kernel)
        v_new[goal.y, goal.x] = 0.0
        sweeps += 1
        delta = _value_delta(v, v_new)
        v = v_new
        if delta < tol:
            converged = True
            break
    _q_from_v(v, reward_fields, q)
    return ValueArtifacts(q=q, v=v, iterations_run=sweeps, converged=converged)


def _backward_time_layered(
    spec: GridSpec,
    goal: State,
    reward_fields: np.ndarray,
    backup: BackupOperator,
    kernel: GaussianKernel | None,
) -> ValueArtifacts:
    """One sweep per time layer, from the goal layer down to z=0."""
    if goal.z is None:
        raise ValueError("time-augmented mode needs a goal with z set")
    n = spec.horizon
    v = np.full((n,) + spec.shape, -np.inf)
    q = np.full((n,) + spec.shape + (len(ACTIONS),), -np.inf)
    v[goal.z, goal.y, goal.x] = 0.0
    for z in range(goal.z - 1, -1, -1):
        _q_from_v(v[z + 1], reward_fields, q[z])
        layer = apply_backup(q[z], backup)
        if kernel is not None:
            layer = convolve_v(layer, kernel)
        v[z] = layer
    return ValueArtifacts(q=q, v=v, iterations_run=max(goal.z, 0), converged=True)


def make_policy(artifacts: ValueArtifacts, rule: str = "q_only") -> Policy:
    """Row-normalized exp of the action values.

    rule is "q_only" (pi proportional to exp Q) or "q_minus_v" (pi
    proportional to exp(Q - V)); V is constant within a row, so after the
    shared max stabilization both rules yield the same probabilities and
    are computed by one code path. States with no finite action value get
    a uniform row.
    """
    if rule not in ("q_only", "q_minus_v"):
        raise ValueError(f"unknown policy rule {rule!r}")
    q = artifacts.q
    mx = q.max(axis=-1, keepdims=True)
    finite = np.isfinite(mx[..., 0])
    probs = np.full(q.shape, 1.0 / q.shape[-1])
    if finite.any():
        z = np.exp(q[finite] - mx[finite])
        probs[finite] = z / z.sum(axis=-1, keepdims=True)
    return Policy(probs=probs)
