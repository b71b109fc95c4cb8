"""End-to-end pipelines: dataset synthesis, training, gap filling, evaluation.

A "variant" bundles the planner/policy choices of one method row:

* ``2d``: plain state reward, approximate softmax backup, exp(Q - V) policy.
* ``3d``: the same but on time-augmented states, so generated bridges span
  exactly the gap's step count.
* ``proposed``: hard max backup, reward divided by the L_p step length,
  exp(Q) policy, optional Gaussian blur between sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import dataio
from .dataio import GapMask, GappedTrajectory
from .errors import ConfigError, ParseError
from .generate import GapQuery, interpolate_gap, rollout_stochastic
from .grid import GridSpec, State, Trajectory, chebyshev, discretize
from .metrics import evaluate_interpolations
from .planner import BackupOperator, GaussianKernel, backward_pass, make_policy
from .reward import FeatureMap, Theta, goal_distance_channel
from .training import TrainConfig, TrainingSet, train


@dataclass(frozen=True)
class MethodVariant:
    """Planner and policy settings of one comparison row."""

    name: str
    backup: BackupOperator
    p: float | None = None
    kernel: GaussianKernel | None = None
    policy_rule: str = "q_minus_v"
    time_augmented: bool = False


def method_variant(
    kind: str, p: float | None = 2.0, conv: bool = False
) -> MethodVariant:
    """Build a variant from CLI-ish flags: kind in {2d, 3d, proposed}."""
    kind = kind.lower()
    if kind == "2d":
        return MethodVariant("2d", BackupOperator.SOFTMAX_APPROX)
    if kind == "3d":
        return MethodVariant("3d", BackupOperator.SOFTMAX_APPROX, time_augmented=True)
    if kind == "proposed":
        kernel = GaussianKernel.make(1, 1.0) if conv else None
        label = f"p={p:g} {'w' if conv else 'w/o'} conv"
        return MethodVariant(label, BackupOperator.HARD_MAX, p=p, kernel=kernel,
                             policy_rule="q_only")
    raise ConfigError(f"unknown method kind {kind!r}")


def train_config_for(variant: MethodVariant, **overrides) -> TrainConfig:
    cfg = TrainConfig(
        backup=variant.backup,
        p=variant.p,
        kernel=variant.kernel,
        policy_rule=variant.policy_rule,
        time_augmented=variant.time_augmented,
    )
    return replace(cfg, **overrides) if overrides else cfg


# ---------------------------------------------------------------------------
# synthetic data


def terrain_channels(
    spec: GridSpec,
    n_channels: int,
    seed: int,
    n_bumps: int | None = None,
    bump_sigma: float | None = None,
) -> np.ndarray:
    """Seeded terrain rasters in [0, 1] made of distinct smooth cost bumps.

    A mostly-flat background with a few Gaussian mounds gives trajectories
    real obstacles to detour around, and chords between gap anchors often
    face a near-tie between passing left or right of a mound.
    """
    rng = np.random.default_rng(seed)
    if n_bumps is None:
        n_bumps = max(3, (spec.width * spec.height) // 130)
    if bump_sigma is None:
        bump_sigma = max(2.0, min(spec.width, spec.height) / 9)
    ys, xs = np.mgrid[0 : spec.height, 0 : spec.width]
    out = []
    for _ in range(n_channels):
        field = np.zeros(spec.shape)
        for _ in range(n_bumps):
            cx = rng.uniform(0.1 * spec.width, 0.9 * spec.width)
            cy = rng.uniform(0.1 * spec.height, 0.9 * spec.height)
            d2 = (xs - cx) ** 2 + (ys - cy) ** 2
            field = np.maximum(field, np.exp(-d2 / (2.0 * bump_sigma ** 2)))
        out.append(dataio.scale_channel(field))
    return np.stack(out)


def synth_feature_map(spec: GridSpec, n_terrain: int, seed: int) -> FeatureMap:
    """Constant channel plus seeded terrain channels."""
    chans = [np.ones(spec.shape)]
    if n_terrain:
        chans.extend(terrain_channels(spec, n_terrain, seed))
    return FeatureMap(np.stack(chans))


def sample_endpoint_pair(
    rng: np.random.Generator, spec: GridSpec, min_separation: int
) -> tuple[State, State]:
    while True:
        sx, sy, gx, gy = (
            int(rng.integers(0, spec.width)),
            int(rng.integers(0, spec.height)),
            int(rng.integers(0, spec.width)),
            int(rng.integers(0, spec.height)),
        )
        if chebyshev((sx, sy), (gx, gy)) >= min_separation:
            return State(sx, sy), State(gx, gy)


def synthesize_dataset(
    spec: GridSpec,
    theta_true: Theta,
    features: FeatureMap,
    n_train: int = 43,
    n_test: int = 10,
    seed: int = 0,
    min_separation: int | None = None,
    jitter: float = 0.25,
    budget_factor: int = 4,
    retries: int = 20,
    generator_variant: MethodVariant | None = None,
) -> tuple[list[GappedTrajectory], list[GappedTrajectory]]:
    """Sample trajectories from the true reward field's stochastic policy.

    Each trajectory is a stochastic rollout between a random endpoint pair.
    The generating policy defaults to the plain state-reward soft-backup
    configuration, standing in for the noisy natural process every variant
    is later fit against. Points are the grid cells' centers with seeded
    sub-cell jitter, so reloading reproduces the same grid path bit for
    bit.
    """
    if min_separation is None:
        min_separation = max(2, (3 * min(spec.width, spec.height)) // 4)
    rng = np.random.default_rng(seed)
    variant = generator_variant if generator_variant is not None else method_variant("2d")

    def make_one(idx: int, prefix: str) -> GappedTrajectory:
        while True:
            start, goal = sample_endpoint_pair(rng, spec, min_separation)
            artifacts = backward_pass(
                spec, goal, theta_true, features,
                p=variant.p, backup=variant.backup, kernel=variant.kernel,
            )
            query = GapQuery(
                start=start,
                goal=goal,
                max_steps=budget_factor * chebyshev(start, goal),
                mode="stochastic",
                retries=retries,
                rng_seed=int(rng.integers(0, 2 ** 31)),
            )
            walk = rollout_stochastic(make_policy(artifacts, variant.policy_rule), query, spec)
            if walk.reached_goal and len(walk.states) >= 6:
                break
        pts = np.array([spec.cell_center(s) for s in walk.states])
        if jitter > 0:
            cell = np.asarray(spec.cell_size)
            pts = pts + rng.uniform(-jitter, jitter, size=pts.shape) * cell
        return GappedTrajectory(
            traj_id=f"{prefix}{idx:03d}",
            times=np.arange(len(pts)),
            points=pts,
        )

    train_set = [make_one(i, "train") for i in range(n_train)]
    test_set = [make_one(i, "test") for i in range(n_test)]
    return train_set, test_set


def synthesize_files(
    out_dir,
    spec: GridSpec,
    theta_true: Theta,
    n_terrain: int = 2,
    n_train: int = 43,
    n_test: int = 10,
    gap_fraction: float = 0.3,
    seed: int = 0,
) -> dict[str, Path]:
    """Write a complete synthetic experiment directory.

    Produces train.csv, test.csv (ground truth), test_masked.csv, gaps.csv,
    features.csv and grid.cfg.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    features = synth_feature_map(spec, n_terrain, seed)
    train_set, test_set = synthesize_dataset(
        spec, theta_true, features, n_train=n_train, n_test=n_test, seed=seed
    )
    masked, masks = dataio.mask_gaps(test_set, fraction=gap_fraction, seed=seed + 1)

    paths = {
        "train": out_dir / "train.csv",
        "test": out_dir / "test.csv",
        "masked": out_dir / "test_masked.csv",
        "gaps": out_dir / "gaps.csv",
        "features": out_dir / "features.csv",
        "config": out_dir / "grid.cfg",
    }
    dataio.write_trajectory_rows(paths["train"], train_set)
    dataio.write_trajectory_rows(paths["test"], test_set)
    dataio.write_trajectory_rows(paths["masked"], masked)
    dataio.write_gap_masks(paths["gaps"], masks)
    dataio.write_flat_features(paths["features"], features)
    dataio.write_config(
        paths["config"],
        {
            "origin": f"{spec.origin[0]},{spec.origin[1]}",
            "cell_size": f"{spec.cell_size[0]}"
            if spec.cell_size[0] == spec.cell_size[1]
            else f"{spec.cell_size[0]},{spec.cell_size[1]}",
            "width": spec.width,
            "height": spec.height,
        },
    )
    return paths


# ---------------------------------------------------------------------------
# training and interpolation over files


def build_training_set(
    trajectories: list[Trajectory],
    features: FeatureMap,
    spec: GridSpec,
    goal_distance_channel: bool = False,
) -> TrainingSet:
    return TrainingSet(
        trajectories=trajectories,
        features=features,
        spec=spec,
        goal_distance_channel=goal_distance_channel,
    )


def train_variant(
    trajectories: list[Trajectory],
    features: FeatureMap,
    spec: GridSpec,
    variant: MethodVariant,
    goal_distance_channel: bool = False,
    **cfg_overrides,
):
    ts = build_training_set(trajectories, features, spec, goal_distance_channel)
    cfg = train_config_for(variant, **cfg_overrides)
    return train(ts, cfg)


def _resample_polyline(points: np.ndarray, n: int) -> np.ndarray:
    """n points evenly spaced by arc length along the interior of a polyline."""
    pts = np.asarray(points, dtype=float)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total == 0:
        return np.repeat(pts[:1], n, axis=0)
    targets = np.arange(1, n + 1) / (n + 1) * total
    out = np.empty((n, pts.shape[1]))
    for i, t in enumerate(targets):
        j = int(np.searchsorted(cum, t, side="right") - 1)
        j = min(j, len(seg) - 1)
        frac = (t - cum[j]) / seg[j] if seg[j] > 0 else 0.0
        out[i] = pts[j] + frac * (pts[j + 1] - pts[j])
    return out


def fill_gaps(
    masked: GappedTrajectory,
    theta: Theta,
    base_features: FeatureMap,
    spec: GridSpec,
    variant: MethodVariant,
    mode: str = "deterministic",
    seed: int = 0,
    retries: int = 8,
    budget_factor: int = 4,
    use_goal_distance: bool = False,
) -> GappedTrajectory:
    """Complete every masked run of one trajectory.

    Anchors are the observed fixes around each run; the bridge is generated
    on the grid (per variant) and written back as cell centers, resampled
    along the bridge when its state count differs from the gap's row count.
    Mode "linear" fills with straight-segment points instead of a rollout.
    """
    pts = masked.points.copy()
    for run_index, (start_idx, length) in enumerate(masked.gap_runs()):
        if start_idx == 0 or start_idx + length >= len(pts):
            raise ConfigError(f"gap in {masked.traj_id!r} touches an endpoint")
        a_pt = pts[start_idx - 1]
        b_pt = pts[start_idx + length]
        if mode == "linear":
            pts[start_idx : start_idx + length] = dataio.linear_interpolation(
                a_pt, b_pt, length
            )
            continue
        a = discretize(a_pt, spec)
        b = discretize(b_pt, spec)
        span = length + 1
        if variant.time_augmented:
            gap_spec = spec.with_horizon(span + 1)
            goal = State(b.x, b.y, span)
        else:
            gap_spec = spec
            goal = b
        fm = base_features
        if use_goal_distance:
            fm = FeatureMap(
                np.concatenate([base_features.values, goal_distance_channel(spec, b)[None]])
            )
        artifacts = backward_pass(
            gap_spec, goal, theta, fm,
            p=variant.p, backup=variant.backup, kernel=variant.kernel,
        )
        completed, walk = interpolate_gap(
            prefix=[a],
            suffix=[b],
            missing_steps=length,
            artifacts=artifacts,
            spec=gap_spec,
            mode=mode,
            rng_seed=seed * 10007 + run_index,
            retries=retries,
            budget_factor=budget_factor,
            policy_rule=variant.policy_rule,
        )
        bridge = completed[1:-1]
        centers = np.array([spec.cell_center(State(s.x, s.y)) for s in bridge])
        if len(bridge) == length:
            fill = centers
        else:
            poly = np.vstack([a_pt[None, :], centers, b_pt[None, :]]) if len(bridge) else \
                np.vstack([a_pt[None, :], b_pt[None, :]])
            fill = _resample_polyline(poly, length)
        pts[start_idx : start_idx + length] = fill
    return GappedTrajectory(masked.traj_id, masked.times.copy(), pts)


def interpolate_dataset(
    masked_set: list[GappedTrajectory],
    theta: Theta,
    features: FeatureMap,
    spec: GridSpec,
    variant: MethodVariant,
    mode: str = "deterministic",
    seed: int = 0,
    retries: int = 8,
    budget_factor: int = 4,
    use_goal_distance: bool = False,
) -> list[GappedTrajectory]:
    return [
        fill_gaps(
            m, theta, features, spec, variant,
            mode=mode, seed=seed + i, retries=retries,
            budget_factor=budget_factor,
            use_goal_distance=use_goal_distance,
        )
        for i, m in enumerate(masked_set)
    ]


# ---------------------------------------------------------------------------
# evaluation


def _to_units(points: np.ndarray, spec: GridSpec, units: str) -> np.ndarray:
    if units == "raw":
        return points
    if units == "cells":
        return (points - np.asarray(spec.origin)) / np.asarray(spec.cell_size)
    raise ConfigError(f"unknown units {units!r}")


def evaluate_dataset(
    gt_set: list[GappedTrajectory],
    pred_set: list[GappedTrajectory],
    masks: list[GapMask],
    spec: GridSpec,
    units: str = "cells",
    whole_trajectory: bool = False,
) -> tuple[float, float, list[float]]:
    """MHD per trajectory over the masked segment (or the whole track)."""
    gt_by_id = {t.traj_id: t for t in gt_set}
    pred_by_id = {t.traj_id: t for t in pred_set}
    gt_segs = []
    pred_segs = []
    for mask in masks:
        if mask.length == 0 and not whole_trajectory:
            continue
        gt = gt_by_id.get(mask.traj_id)
        pred = pred_by_id.get(mask.traj_id)
        if gt is None or pred is None:
            raise ParseError(f"trajectory {mask.traj_id!r} missing from gt or prediction")
        if whole_trajectory:
            sl = slice(None)
        else:
            sl = slice(mask.start, mask.start + mask.length)
        gt_segs.append(_to_units(gt.points[sl], spec, units))
        pred_segs.append(_to_units(pred.points[sl], spec, units))
    return evaluate_interpolations(gt_segs, pred_segs)
