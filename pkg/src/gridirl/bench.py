"""Wall-clock benchmark harness over the method variants.

Reports a comparison-table CSV with one row per variant: MHD columns
(optional, filled only when the synthetic evaluation runs), value-iteration
time, and the time of one weight-update gradient computation, plus ratio
columns normalized to the proposed no-blur row.

Granularity note: the headline vi_time_s column is per single sweep over
the full state space. For the time-augmented variant one such sweep visits
every (x, y, z) cell, which a layered backward pass realizes as one full
pass; per-sweep and per-pass times for all variants are written to the
optional trace file.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .experiment import MethodVariant, method_variant, synth_feature_map, synthesize_dataset
from .grid import GridSpec, State, Trajectory
from .planner import backward_pass
from .reward import Theta
from .training import TrainConfig, TrainingSet, gradient, empirical_feature_mean, model_feature_expectation
from .dataio import GappedTrajectory

TABLE_COLUMNS = [
    "method",
    "mhd_det",
    "mhd_sto",
    "vi_time_s",
    "vi_ratio",
    "theta_update_s",
    "update_ratio",
]


@dataclass
class BenchRow:
    method: str
    vi_per_sweep_s: float
    vi_full_pass_s: float
    sweeps: int
    theta_update_s: float
    mhd_det: float | None = None
    mhd_sto: float | None = None


@dataclass
class BenchResult:
    rows: list[BenchRow] = field(default_factory=list)
    baseline_method: str = ""

    def baseline(self) -> BenchRow:
        for row in self.rows:
            if row.method == self.baseline_method:
                return row
        raise ValueError(f"baseline row {self.baseline_method!r} missing")


def default_variants() -> list[MethodVariant]:
    return [
        method_variant("3d"),
        method_variant("2d"),
        method_variant("proposed", p=2.0, conv=False),
        method_variant("proposed", p=3.0, conv=False),
        method_variant("proposed", p=2.0, conv=True),
        method_variant("proposed", p=3.0, conv=True),
    ]


def _median_time(fn, repetitions: int) -> float:
    fn()  # warm-up, discarded
    times = []
    for _ in range(max(1, repetitions)):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def time_backward_pass(
    variant: MethodVariant,
    spec: GridSpec,
    theta: Theta,
    features,
    horizon: int,
    repetitions: int = 5,
) -> tuple[float, float, int]:
    """(per-sweep seconds, full-pass seconds, sweeps in a full pass)."""
    if variant.time_augmented:
        gap_spec = spec.with_horizon(horizon)
        goal = State(spec.width - 1, spec.height - 1, horizon - 1)
    else:
        gap_spec = spec
        goal = State(spec.width - 1, spec.height - 1)

    def full():
        return backward_pass(
            gap_spec, goal, theta, features,
            p=variant.p, backup=variant.backup, kernel=variant.kernel,
        )

    full_s = _median_time(full, repetitions)
    artifacts = full()
    sweeps = max(artifacts.iterations_run, 1)
    if variant.time_augmented:
        # one full-state-space sweep covers all layers: exactly one layered pass
        per_sweep = full_s
    else:
        per_sweep = full_s / sweeps
    return per_sweep, full_s, sweeps


def time_theta_update(
    variant: MethodVariant,
    ts: TrainingSet,
    theta: Theta,
    repetitions: int = 3,
) -> float:
    cfg = TrainConfig(
        backup=variant.backup,
        p=variant.p,
        kernel=variant.kernel,
        policy_rule=variant.policy_rule,
        time_augmented=variant.time_augmented,
    )
    f_bar = empirical_feature_mean(ts)

    def one_update():
        f_model, _ = model_feature_expectation(ts, theta, cfg)
        return gradient(f_bar, f_model)

    return _median_time(one_update, repetitions)


def run_benchmark(
    width: int = 64,
    height: int = 64,
    horizon: int = 16,
    n_trajectories: int = 4,
    repetitions: int = 5,
    seed: int = 0,
    variants: list[MethodVariant] | None = None,
    with_updates: bool = True,
) -> BenchResult:
    """Time every variant's backward pass (and optionally one weight update).

    The update timing plans per demonstration on a small synthetic set whose
    trajectory lengths sit near `horizon`, mirroring how training cost
    scales with the demonstrations.
    """
    spec = GridSpec(width=width, height=height)
    variants = variants if variants is not None else default_variants()
    features = synth_feature_map(spec, n_terrain=1, seed=seed)
    theta = Theta(np.full(features.n_features, -1.5))

    ts = None
    if with_updates:
        train_set, _ = synthesize_dataset(
            spec, theta, features,
            n_train=n_trajectories, n_test=0, seed=seed,
            min_separation=min(horizon - 2, min(width, height) - 2),
        )
        trajectories = [
            Trajectory.from_points(t.traj_id, t.times, t.points, spec)
            for t in train_set
        ]
        ts = TrainingSet(trajectories=trajectories, features=features, spec=spec)

    result = BenchResult(baseline_method=method_variant("proposed", 2.0, False).name)
    for variant in variants:
        per_sweep, full_s, sweeps = time_backward_pass(
            variant, spec, theta, features, horizon, repetitions
        )
        update_s = time_theta_update(variant, ts, theta) if with_updates else float("nan")
        result.rows.append(
            BenchRow(
                method=variant.name,
                vi_per_sweep_s=per_sweep,
                vi_full_pass_s=full_s,
                sweeps=sweeps,
                theta_update_s=update_s,
            )
        )
    return result


def write_benchmark_csv(path, result: BenchResult) -> None:
    """Comparison-shaped CSV; ratios are relative to the proposed no-blur row."""
    base = result.baseline()
    lines = [",".join(TABLE_COLUMNS)]
    for row in result.rows:
        vi_ratio = row.vi_per_sweep_s / base.vi_per_sweep_s
        upd_ratio = (
            row.theta_update_s / base.theta_update_s
            if np.isfinite(row.theta_update_s) and np.isfinite(base.theta_update_s)
            else float("nan")
        )
        lines.append(
            ",".join(
                [
                    row.method,
                    "" if row.mhd_det is None else f"{row.mhd_det:.4f}",
                    "" if row.mhd_sto is None else f"{row.mhd_sto:.4f}",
                    f"{row.vi_per_sweep_s:.6f}",
                    f"{vi_ratio:.2f}",
                    f"{row.theta_update_s:.6f}" if np.isfinite(row.theta_update_s) else "",
                    f"{upd_ratio:.2f}" if np.isfinite(upd_ratio) else "",
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_benchmark_trace(path, result: BenchResult) -> None:
    """Both timing granularities per variant, for disambiguation."""
    lines = ["method,vi_per_sweep_s,vi_full_pass_s,sweeps,theta_update_s"]
    for row in result.rows:
        lines.append(
            f"{row.method},{row.vi_per_sweep_s:.6f},{row.vi_full_pass_s:.6f},"
            f"{row.sweeps},{row.theta_update_s:.6f}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
