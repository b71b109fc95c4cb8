"""Trajectory similarity: modified Hausdorff distance and evaluation stats."""

from __future__ import annotations

import numpy as np

from .errors import EmptyInput, LengthMismatch


def _as_points(seq) -> np.ndarray:
    pts = np.asarray(seq, dtype=float)
    if pts.size == 0:
        raise EmptyInput("empty point sequence")
    pts = pts.reshape(len(pts), -1)
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    return pts


def mhd(a, b) -> float:
    """Modified Hausdorff distance between two point sequences.

    The larger of the two mean nearest-neighbor distances, with the
    Euclidean point metric; symmetric, non-negative, zero on identical
    sequences.
    """
    pa = _as_points(a)
    pb = _as_points(b)
    diff = pa[:, None, :] - pb[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))
    return float(max(dist.min(axis=1).mean(), dist.min(axis=0).mean()))


def evaluate_interpolations(gt: list, pred: list) -> tuple[float, float, list[float]]:
    """Per-pair MHD plus mean and sample standard deviation (n-1 denominator).

    With a single pair the std is reported as 0.0.
    """
    if len(gt) != len(pred):
        raise LengthMismatch(f"{len(gt)} ground-truth vs {len(pred)} predictions")
    if not gt:
        raise EmptyInput("no pairs to evaluate")
    values = [mhd(g, p) for g, p in zip(gt, pred)]
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return mean, std, values
