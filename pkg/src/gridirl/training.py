"""Maximum-entropy IRL training loop.

Each epoch plans per demonstration (backward pass toward its goal, policy,
forward pass from its start for its state count), accumulates the
visitation-weighted model feature expectation, and applies the
multiplicative exponentiated update theta <- theta * exp(lr * gradient),
which preserves the weights' signs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonFinite
from .grid import GridSpec, State, Trajectory
from .planner import BackupOperator, GaussianKernel, backward_pass, make_policy
from .reward import FeatureMap, Theta, goal_distance_channel
from .visitation import forward_pass


@dataclass
class TrainingSet:
    """Grid-projected demonstrations plus the shared feature channels.

    With goal_distance_channel=True a per-goal normalized distance channel
    is appended to the base channels when planning for each trajectory, so
    theta gains one extra weight.
    """

    trajectories: list[Trajectory]
    features: FeatureMap
    spec: GridSpec
    goal_distance_channel: bool = False

    def __post_init__(self):
        if not self.trajectories:
            raise ValueError("training set must not be empty")
        for t in self.trajectories:
            if len(t.states) < 2:
                raise ValueError(f"trajectory {t.traj_id} has fewer than 2 states")

    @property
    def n_features(self) -> int:
        return self.features.n_features + (1 if self.goal_distance_channel else 0)

    def features_for(self, goal: State) -> FeatureMap:
        if not self.goal_distance_channel:
            return self.features
        chan = goal_distance_channel(self.spec, goal)[None]
        return FeatureMap(np.concatenate([self.features.values, chan]))


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    max_epochs: int = 100
    grad_tol: float = 1e-4
    backup: BackupOperator = BackupOperator.SOFTMAX_APPROX
    p: float | None = None
    kernel: GaussianKernel | None = None
    policy_rule: str = "q_minus_v"
    time_augmented: bool = False
    planner_tol: float = 1e-6
    planner_max_iters: int | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class TrainReport:
    """Per-epoch history: weights, gradient norms and phase wall-times."""

    theta_history: list[np.ndarray] = field(default_factory=list)
    grad_norm_history: list[float] = field(default_factory=list)
    vi_seconds: list[float] = field(default_factory=list)
    update_seconds: list[float] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    epochs_run: int = 0
    converged: bool = False


def empirical_feature_mean(ts: TrainingSet) -> np.ndarray:
    """Mean over demonstrations of their summed per-state feature vectors."""
    total = np.zeros(ts.n_features)
    for traj in ts.trajectories:
        fm = ts.features_for(traj.goal)
        for s in traj.states:
            total += fm.at(s)
    return total / len(ts.trajectories)


def trajectory_expectation(
    traj: Trajectory, ts: TrainingSet, theta: Theta, cfg: TrainConfig
) -> tuple[np.ndarray, bool]:
    """Visitation-weighted feature expectation for one demonstration."""
    fm = ts.features_for(traj.goal)
    n = len(traj.states)
    if cfg.time_augmented:
        spec = ts.spec.with_horizon(n)
        start = State(traj.start.x, traj.start.y, 0)
        goal = State(traj.goal.x, traj.goal.y, n - 1)
    else:
        spec = ts.spec
        start, goal = traj.start, traj.goal
    artifacts = backward_pass(
        spec,
        goal,
        theta,
        fm,
        p=cfg.p,
        backup=cfg.backup,
        kernel=cfg.kernel,
        max_iters=cfg.planner_max_iters,
        tol=cfg.planner_tol,
    )
    policy = make_policy(artifacts, rule=cfg.policy_rule)
    visits = forward_pass(policy, spec, start, goal, n_steps=n)
    d = visits.d.sum(axis=0) if cfg.time_augmented else visits.d
    expectation = np.einsum("kyx,yx->k", fm.values, d)
    return expectation, artifacts.converged


def model_feature_expectation(
    ts: TrainingSet, theta: Theta, cfg: TrainConfig
) -> tuple[np.ndarray, list[str]]:
    """Average the per-demonstration expectations; collects planner warnings."""
    total = np.zeros(ts.n_features)
    warnings = []
    for traj in ts.trajectories:
        expectation, converged = trajectory_expectation(traj, ts, theta, cfg)
        total += expectation
        if not converged:
            warnings.append(f"value iteration did not converge for {traj.traj_id}")
    return total / len(ts.trajectories), warnings


def gradient(f_bar: np.ndarray, f_model: np.ndarray) -> np.ndarray:
    if f_bar.shape != f_model.shape:
        raise DimensionMismatch(f"{f_bar.shape} vs {f_model.shape}")
    return f_bar - f_model


def update_theta(theta: Theta, grad: np.ndarray, learning_rate: float) -> Theta:
    """Multiplicative update theta_i * exp(lr * g_i); signs are preserved."""
    with np.errstate(over="ignore"):
        w = theta.weights * np.exp(learning_rate * grad)
    # overflow to inf and underflow to zero both lose the weight; either
    # signals a learning rate far too large for the gradient scale
    if not np.all(np.isfinite(w)) or np.any(w == 0.0):
        raise NonFinite("theta update overflowed; reduce the learning rate")
    return Theta(w)


def train(ts: TrainingSet, cfg: TrainConfig, theta0: Theta | None = None) -> tuple[Theta, TrainReport]:
    """Iterate feature matching until the gradient max-norm drops under grad_tol."""
    theta = theta0 if theta0 is not None else Theta.default(ts.n_features)
    if theta.n != ts.n_features:
        raise DimensionMismatch(
            f"theta has {theta.n} weights, training set needs {ts.n_features}"
        )
    report = TrainReport()
    f_bar = empirical_feature_mean(ts)
    for _ in range(cfg.max_epochs):
        t0 = time.perf_counter()
        f_model, warnings = model_feature_expectation(ts, theta, cfg)
        t1 = time.perf_counter()
        grad = gradient(f_bar, f_model)
        # Exponentiated-gradient ascent acts on the positive cost weights
        # -theta; rewritten for the negative-weight convention the exponent
        # flips sign (a positive gradient component must pull the weight
        # toward zero, i.e. shrink its magnitude).
        theta = update_theta(theta, grad, -cfg.learning_rate)
        t2 = time.perf_counter()

        report.theta_history.append(theta.weights.copy())
        report.grad_norm_history.append(float(np.max(np.abs(grad))))
        report.vi_seconds.append(t1 - t0)
        report.update_seconds.append(t2 - t1)
        report.warnings.extend(warnings)
        report.epochs_run += 1
        if report.grad_norm_history[-1] < cfg.grad_tol:
            report.converged = True
            break
    return theta, report
