"""Command-line interface.

Subcommands: synth, train, interpolate, evaluate, bench. Grid geometry is
read from a key=value config file; command-line flags win over config
values. Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import dataio
from .errors import GridIrlError
from .experiment import (
    evaluate_dataset,
    interpolate_dataset,
    method_variant,
    synthesize_files,
    train_variant,
)
from .grid import GridSpec, discretize
from .planner import backward_pass, make_policy
from .reward import Theta
from .visitation import forward_pass


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _spec_from(args) -> GridSpec:
    cfg = dataio.read_config(args.config) if getattr(args, "config", None) else {}
    if getattr(args, "width", None) is not None:
        cfg["width"] = str(args.width)
    if getattr(args, "height", None) is not None:
        cfg["height"] = str(args.height)
    if getattr(args, "cell_size", None) is not None:
        cfg["cell_size"] = str(args.cell_size)
    if getattr(args, "origin", None) is not None:
        cfg["origin"] = args.origin
    return dataio.grid_spec_from_config(cfg)


def _variant_from(args):
    conv = getattr(args, "conv", "off") == "on"
    return method_variant(args.variant, p=args.p, conv=conv)


def _load_features(path, spec):
    return dataio.load_flat_features(path, spec)


def cmd_synth(args) -> int:
    spec = GridSpec(
        origin=tuple(_parse_floats(args.origin)),
        cell_size=args.cell_size,
        width=args.width,
        height=args.height,
    )
    weights = np.array(_parse_floats(args.theta)) if args.theta else np.array(
        [-1.2] + [-2.4] * args.terrain
    )
    theta = Theta(weights)
    paths = synthesize_files(
        args.out,
        spec,
        theta,
        n_terrain=args.terrain,
        n_train=args.n_train,
        n_test=args.n_test,
        gap_fraction=args.gap_fraction,
        seed=args.seed,
    )
    for name, p in paths.items():
        print(f"{name}: {p}")
    return 0


def cmd_train(args) -> int:
    spec = _spec_from(args)
    variant = _variant_from(args)
    trajectories = dataio.load_dataset(args.data, spec)
    features = _load_features(args.features, spec)
    theta, report = train_variant(
        trajectories,
        features,
        spec,
        variant,
        goal_distance_channel=args.goal_distance,
        learning_rate=args.lr,
        max_epochs=args.epochs,
        grad_tol=args.grad_tol,
    )
    dataio.write_theta(args.out, theta)
    if args.report:
        _write_train_report(args.report, report)
    for warning in report.warnings[:5]:
        print(f"warning: {warning}", file=sys.stderr)
    print(
        f"trained {report.epochs_run} epochs, final |grad|_inf = "
        f"{report.grad_norm_history[-1]:.3e}, converged = {report.converged}"
    )
    return 0


def _write_train_report(path, report) -> None:
    n_weights = len(report.theta_history[0]) if report.theta_history else 0
    header = ["epoch", "grad_norm", "vi_seconds", "update_seconds"] + [
        f"theta_{i}" for i in range(n_weights)
    ]
    lines = [",".join(header)]
    for i in range(report.epochs_run):
        row = [
            str(i),
            f"{report.grad_norm_history[i]:.9e}",
            f"{report.vi_seconds[i]:.6f}",
            f"{report.update_seconds[i]:.6f}",
        ] + [repr(float(w)) for w in report.theta_history[i]]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_interpolate(args) -> int:
    spec = _spec_from(args)
    variant = _variant_from(args)
    mode = {"det": "deterministic", "sto": "stochastic", "linear": "linear"}[args.mode]
    masked = dataio.read_trajectory_rows(args.data)
    theta = dataio.read_theta(args.theta) if args.theta else None
    features = _load_features(args.features, spec) if args.features else None
    if mode != "linear" and (theta is None or features is None):
        raise GridIrlError("interpolation modes det/sto need --theta and --features")
    completed = interpolate_dataset(
        masked,
        theta,
        features,
        spec,
        variant,
        mode=mode,
        seed=args.seed,
        retries=args.retries,
        use_goal_distance=args.goal_distance,
    )
    dataio.write_trajectory_rows(args.out, completed)
    if args.svg_dir:
        _write_svgs(args.svg_dir, masked, completed, f"{variant.name} {args.mode}")
    if args.dump_fields and mode != "linear":
        _dump_fields(args.dump_fields, masked, theta, features, spec, variant)
    print(f"completed {len(completed)} trajectories -> {args.out}")
    return 0


def _write_svgs(svg_dir, masked, completed, label) -> None:
    svg_dir = Path(svg_dir)
    svg_dir.mkdir(parents=True, exist_ok=True)
    by_id = {t.traj_id: t for t in completed}
    for m in masked:
        comp = by_id[m.traj_id]
        observed = m.points[m.observed]
        dataio.write_svg(
            svg_dir / f"{m.traj_id}.svg",
            [("observed", observed), (label, comp.points)],
        )


def _dump_fields(directory, masked, theta, features, spec, variant) -> None:
    """Planner and visitation grids for the first gap, for plotting."""
    for m in masked:
        runs = m.gap_runs()
        if not runs:
            continue
        start_idx, length = runs[0]
        a = discretize(m.points[start_idx - 1], spec)
        b = discretize(m.points[start_idx + length], spec)
        artifacts = backward_pass(
            spec, b, theta, features, p=variant.p,
            backup=variant.backup, kernel=variant.kernel,
        )
        directory = Path(directory)
        dataio.export_value_artifacts(directory, artifacts)
        policy = make_policy(artifacts, rule=variant.policy_rule)
        visits = forward_pass(policy, spec, a, b, n_steps=length + 2)
        dataio.write_grid_csv(directory / "d.csv", visits.d)
        return


def cmd_evaluate(args) -> int:
    spec = _spec_from(args)
    gt = dataio.read_trajectory_rows(args.gt)
    pred = dataio.read_trajectory_rows(args.pred)
    masks = dataio.read_gap_masks(args.gaps)
    mean, std, per_pair = evaluate_dataset(
        gt, pred, masks, spec, units=args.units, whole_trajectory=args.whole
    )
    label = args.method_label or "method"
    Path(args.out).write_text(
        "method,mhd_mean,mhd_std\n" + f"{label},{mean:.6f},{std:.6f}\n"
    )
    print(f"{label}: MHD {mean:.4f} +/- {std:.4f} over {len(per_pair)} trajectories")
    return 0


def cmd_bench(args) -> int:
    result = bench_mod.run_benchmark(
        width=args.width,
        height=args.height,
        horizon=args.horizon,
        repetitions=args.reps,
        seed=args.seed,
        with_updates=not args.no_updates,
    )
    bench_mod.write_benchmark_csv(args.out, result)
    if args.trace:
        bench_mod.write_benchmark_trace(args.trace, result)
    base = result.baseline()
    for row in result.rows:
        print(
            f"{row.method}: vi {row.vi_per_sweep_s:.6f}s/sweep "
            f"(x{row.vi_per_sweep_s / base.vi_per_sweep_s:.2f}), "
            f"full pass {row.vi_full_pass_s:.4f}s in {row.sweeps} sweeps"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridirl")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset directory")
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=24)
    p.add_argument("--height", type=int, default=24)
    p.add_argument("--cell-size", dest="cell_size", type=float, default=1.0)
    p.add_argument("--origin", default="0,0")
    p.add_argument("--n-train", dest="n_train", type=int, default=43)
    p.add_argument("--n-test", dest="n_test", type=int, default=10)
    p.add_argument("--terrain", type=int, default=2)
    p.add_argument("--gap-fraction", dest="gap_fraction", type=float, default=0.3)
    p.add_argument("--theta", default=None, help="true weights, e.g. --theta=-1.2,-2.4")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    common_method = argparse.ArgumentParser(add_help=False)
    common_method.add_argument("--variant", choices=["2d", "3d", "proposed"], default="proposed")
    common_method.add_argument("--p", type=float, default=2.0, choices=[2.0, 3.0])
    common_method.add_argument("--conv", choices=["on", "off"], default="off")
    common_method.add_argument("--goal-distance", dest="goal_distance", action="store_true")
    common_method.add_argument("--config", default=None, help="grid key=value file")
    common_method.add_argument("--width", type=int, default=None)
    common_method.add_argument("--height", type=int, default=None)
    common_method.add_argument("--cell-size", dest="cell_size", type=float, default=None)
    common_method.add_argument("--origin", default=None)

    p = sub.add_parser("train", parents=[common_method], help="fit reward weights")
    p.add_argument("--data", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="theta.csv, one weight per line")
    p.add_argument("--report", default=None, help="per-epoch history CSV (timings vary run to run)")
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--grad-tol", dest="grad_tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("interpolate", parents=[common_method], help="fill masked gaps")
    p.add_argument("--data", required=True, help="trajectory CSV with empty x,y gap rows")
    p.add_argument("--theta", default=None)
    p.add_argument("--features", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["det", "sto", "linear"], default="det")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--retries", type=int, default=8)
    p.add_argument("--svg-dir", dest="svg_dir", default=None)
    p.add_argument("--dump-fields", dest="dump_fields", default=None)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("evaluate", help="MHD of completed gaps against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--gaps", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--cell-size", dest="cell_size", type=float, default=None)
    p.add_argument("--origin", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--method-label", dest="method_label", default=None)
    p.add_argument("--units", choices=["cells", "raw"], default="cells")
    p.add_argument("--whole", action="store_true", help="whole-trajectory MHD")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="time the method variants")
    p.add_argument("--out", required=True)
    p.add_argument("--trace", default=None, help="per-sweep and per-pass timing CSV")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--horizon", type=int, default=16)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-updates", dest="no_updates", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GridIrlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
