"""File formats: trajectory CSV, feature rasters, configs, grid exports, SVG.

Trajectory CSV schema: header ``traj_id,t,x,y``; t is a monotone
non-decreasing integer step within each trajectory. Rows with empty x and y
mark masked (to-be-interpolated) fixes. Feature rasters are either one
height-by-width matrix CSV per channel or a flat ``x,y,f1,...,fk`` table;
channels are min-max scaled to [0, 1] at load.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import OutOfBounds, ParseError, TooShort
from .grid import ACTION_NAMES, GridSpec, State, Trajectory
from .planner import ValueArtifacts
from .reward import FeatureMap, Theta

TRAJ_HEADER = ["traj_id", "t", "x", "y"]


@dataclass
class GappedTrajectory:
    """Raw rows of one trajectory; masked fixes carry nan coordinates."""

    traj_id: str
    times: np.ndarray
    points: np.ndarray  # (n, 2), nan rows are masked

    @property
    def observed(self) -> np.ndarray:
        return ~np.isnan(self.points[:, 0])

    def gap_runs(self) -> list[tuple[int, int]]:
        """(start index, length) of each masked run."""
        runs = []
        i = 0
        obs = self.observed
        while i < len(obs):
            if not obs[i]:
                j = i
                while j < len(obs) and not obs[j]:
                    j += 1
                runs.append((i, j - i))
                i = j
            else:
                i += 1
        return runs


@dataclass
class GapMask:
    """Record of one masked segment, indices into the full row sequence."""

    traj_id: str
    start: int
    length: int


def read_trajectory_rows(path) -> list[GappedTrajectory]:
    """Parse a trajectory CSV, preserving masked rows as nan points."""
    rows_by_id: dict[str, list[tuple[int, float, float]]] = {}
    order: list[str] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TRAJ_HEADER:
            raise ParseError(f"expected header {','.join(TRAJ_HEADER)}", line_no=1)
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 columns, got {len(row)}", line_no)
            tid = row[0].strip()
            try:
                t = int(row[1])
            except ValueError:
                raise ParseError(f"non-integer t {row[1]!r}", line_no) from None
            xs, ys = row[2].strip(), row[3].strip()
            if xs == "" and ys == "":
                x = y = math.nan
            else:
                try:
                    x, y = float(xs), float(ys)
                except ValueError:
                    raise ParseError(f"non-numeric coordinate in {row!r}", line_no) from None
            if tid not in rows_by_id:
                rows_by_id[tid] = []
                order.append(tid)
            prev = rows_by_id[tid]
            if prev and t < prev[-1][0]:
                raise ParseError(f"t not monotone for trajectory {tid!r}", line_no)
            prev.append((t, x, y))
    out = []
    for tid in order:
        rows = rows_by_id[tid]
        out.append(
            GappedTrajectory(
                traj_id=tid,
                times=np.array([r[0] for r in rows], dtype=int),
                points=np.array([[r[1], r[2]] for r in rows], dtype=float),
            )
        )
    return out


def write_trajectory_rows(path, trajectories: list[GappedTrajectory]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJ_HEADER)
        for traj in trajectories:
            for t, (x, y) in zip(traj.times, traj.points):
                if math.isnan(x):
                    writer.writerow([traj.traj_id, int(t), "", ""])
                else:
                    writer.writerow([traj.traj_id, int(t), repr(float(x)), repr(float(y))])


def load_dataset(path, spec: GridSpec, densify: bool = True) -> list[Trajectory]:
    """Load and grid-project complete trajectories (no masked rows allowed)."""
    out = []
    for raw in read_trajectory_rows(path):
        if not raw.observed.all():
            raise ParseError(f"trajectory {raw.traj_id!r} has masked rows; fill gaps first")
        if len(raw.points) < 2:
            raise ParseError(f"trajectory {raw.traj_id!r} has fewer than 2 points")
        try:
            out.append(
                Trajectory.from_points(raw.traj_id, raw.times, raw.points, spec, densify=densify)
            )
        except OutOfBounds as exc:
            raise OutOfBounds(f"trajectory {raw.traj_id!r}: {exc}") from exc
    return out


def mask_gaps(
    trajectories: list[GappedTrajectory],
    fraction: float = 0.3,
    seed: int = 0,
    fixed_length: int | None = None,
) -> tuple[list[GappedTrajectory], list[GapMask]]:
    """Remove one contiguous interior segment per trajectory.

    The gap length is fixed_length or round(fraction * n); placement is
    seeded and keeps both endpoints. Raises TooShort when no interior
    placement exists.
    """
    rng = np.random.default_rng(seed)
    masked = []
    masks = []
    for traj in trajectories:
        n = len(traj.times)
        gap = fixed_length if fixed_length is not None else int(round(fraction * n))
        if gap == 0:
            masked.append(GappedTrajectory(traj.traj_id, traj.times.copy(), traj.points.copy()))
            masks.append(GapMask(traj.traj_id, 0, 0))
            continue
        if gap > n - 2:
            raise TooShort(f"trajectory {traj.traj_id!r}: gap {gap} needs more than {n} rows")
        start = int(rng.integers(1, n - gap))
        pts = traj.points.copy()
        pts[start : start + gap] = math.nan
        masked.append(GappedTrajectory(traj.traj_id, traj.times.copy(), pts))
        masks.append(GapMask(traj.traj_id, start, gap))
    return masked, masks


def write_gap_masks(path, masks: list[GapMask]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["traj_id", "start", "length"])
        for m in masks:
            writer.writerow([m.traj_id, m.start, m.length])


def read_gap_masks(path) -> list[GapMask]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["traj_id", "start", "length"]:
            raise ParseError("expected header traj_id,start,length", line_no=1)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(GapMask(row[0], int(row[1]), int(row[2])))
            except (ValueError, IndexError):
                raise ParseError(f"bad mask row {row!r}", line_no) from None
    return out


def linear_interpolation(p0, p1, n_steps: int) -> np.ndarray:
    """n_steps evenly spaced interior points on the segment p0 -> p1."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    fractions = np.arange(1, n_steps + 1) / (n_steps + 1)
    return p0[None, :] + fractions[:, None] * (p1 - p0)[None, :]


# ---------------------------------------------------------------------------
# feature rasters


def scale_channel(raw: np.ndarray) -> np.ndarray:
    """Min-max scale a channel to [0, 1]; constant channels map to 1."""
    raw = np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(raw)):
        raise ValueError("feature channel must be finite")
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return np.ones_like(raw)
    return (raw - lo) / (hi - lo)


def load_grid_csv(path) -> np.ndarray:
    """One raster channel as a height-by-width matrix, row y=0 first."""
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ParseError(f"bad raster file {path}: {exc}") from exc


def write_grid_csv(path, field: np.ndarray) -> None:
    np.savetxt(path, np.asarray(field), delimiter=",", fmt="%.17g")


def load_flat_features(path, spec: GridSpec) -> FeatureMap:
    """Flat x,y,f1,...,fk table covering every cell; scaled per channel."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] < 3:
        raise ParseError("flat feature file needs columns x,y,f1,...")
    k = data.shape[1] - 2
    channels = np.zeros((k, spec.height, spec.width))
    seen = np.zeros(spec.shape, dtype=bool)
    for row in data:
        x, y = int(row[0]), int(row[1])
        if not spec.in_bounds(x, y):
            raise OutOfBounds(f"feature cell ({x}, {y}) outside grid")
        channels[:, y, x] = row[2:]
        seen[y, x] = True
    if not seen.all():
        raise ParseError("flat feature file does not cover every cell")
    return FeatureMap(np.stack([scale_channel(c) for c in channels]))


def write_flat_features(path, fm: FeatureMap) -> None:
    k, h, w = fm.values.shape
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"] + [f"f{i+1}" for i in range(k)])
        for y in range(h):
            for x in range(w):
                writer.writerow([x, y] + [repr(float(v)) for v in fm.values[:, y, x]])


def load_feature_channels(paths, spec: GridSpec) -> FeatureMap:
    """Stack per-channel raster CSVs into a FeatureMap."""
    channels = []
    for p in paths:
        raw = load_grid_csv(p)
        if raw.shape != spec.shape:
            raise ParseError(f"raster {p} has shape {raw.shape}, grid needs {spec.shape}")
        channels.append(scale_channel(raw))
    return FeatureMap(np.stack(channels))


# ---------------------------------------------------------------------------
# theta and config files


def write_theta(path, theta: Theta) -> None:
    with open(path, "w") as fh:
        for w in theta.weights:
            fh.write(repr(float(w)) + "\n")


def read_theta(path) -> Theta:
    weights = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                weights.append(float(line))
            except ValueError:
                raise ParseError(f"bad weight {line!r}", line_no) from None
    return Theta(np.array(weights))


def read_config(path) -> dict[str, str]:
    """Flat key=value file; # starts a comment."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"expected key = value, got {line!r}", line_no)
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def write_config(path, values: dict) -> None:
    with open(path, "w") as fh:
        for key, value in values.items():
            fh.write(f"{key} = {value}\n")


def grid_spec_from_config(cfg: dict[str, str]) -> GridSpec:
    def get(key, default=None):
        if key in cfg:
            return cfg[key]
        if default is not None:
            return default
        raise ParseError(f"config missing {key!r}")

    cell = get("cell_size", "1.0")
    if "," in cell:
        sx, sy = (float(v) for v in cell.split(","))
        cell_size = (sx, sy)
    else:
        cell_size = float(cell)
    origin_raw = get("origin", "0,0")
    ox, oy = (float(v) for v in origin_raw.split(","))
    horizon = cfg.get("horizon")
    return GridSpec(
        origin=(ox, oy),
        cell_size=cell_size,
        width=int(get("width")),
        height=int(get("height")),
        horizon=int(horizon) if horizon else None,
    )


# ---------------------------------------------------------------------------
# planner/visitation exports and figures


def export_value_artifacts(directory, artifacts: ValueArtifacts) -> list[Path]:
    """Write V and one per-action Q grid as CSVs (2D artifacts only)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    v_path = directory / "v.csv"
    write_grid_csv(v_path, artifacts.v)
    written.append(v_path)
    for i, name in enumerate(ACTION_NAMES):
        q_path = directory / f"q_{name}.csv"
        write_grid_csv(q_path, artifacts.q[..., i])
        written.append(q_path)
    return written


SVG_COLORS = ("#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def write_svg(path, polylines: list[tuple[str, np.ndarray]], size: int = 480) -> None:
    """Labeled trajectory overlay as a standalone SVG.

    polylines is a list of (label, (n, 2) points); colors follow a fixed
    order so output bytes are reproducible.
    """
    if not polylines:
        raise ValueError("nothing to plot")
    all_pts = np.vstack([pts for _, pts in polylines])
    lo = all_pts.min(axis=0)
    hi = all_pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    margin = 24

    def to_px(pts):
        scaled = (pts - lo) / span
        xs = margin + scaled[:, 0] * (size - 2 * margin)
        ys = size - margin - scaled[:, 1] * (size - 2 * margin)  # y up
        return xs, ys

    buf = io.StringIO()
    buf.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">\n'
    )
    buf.write(f'<rect width="{size}" height="{size}" fill="white"/>\n')
    for idx, (label, pts) in enumerate(polylines):
        color = SVG_COLORS[idx % len(SVG_COLORS)]
        xs, ys = to_px(np.asarray(pts, dtype=float))
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        buf.write(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>\n'
        )
        buf.write(
            f'<text x="{margin}" y="{16 + 14 * idx}" font-size="12" fill="{color}">'
            f"{label}</text>\n"
        )
    buf.write("</svg>\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())
