"""Command-line front end.

Subcommands: gen, build, get-cell, get-cells, decompress, stats, bench.
The default random seed is 0; the TRASTER_SEED environment variable
overrides it and an explicit --seed flag wins over both. Exit status is 0
exactly when the command succeeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import dataio
from .k2raster import K2Raster
from .tk2raster import TK2Raster


def _default_seed() -> int:
    raw = os.environ.get("TRASTER_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"TRASTER_SEED must be an integer, got {raw!r}")


def _load_series(path) -> TK2Raster:
    obj = dataio.read_container(path)
    if isinstance(obj, K2Raster):
        # single-grid file: present it as a one-frame series
        return TK2Raster(obj.k, 1, obj.rows, obj.cols, [obj])
    return obj


def cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    lo, hi = args.value_range
    m0 = dataio.gen_random_smooth(args.rows, args.cols, (lo, hi),
                                  args.smoothness, seed)
    m1 = dataio.gen_random_smooth(args.rows, args.cols, (lo, hi),
                                  args.smoothness, seed + 1)
    series = dataio.gen_interpolated(m0, m1, args.steps, take=args.take)
    dataio.write_grid(args.output, series)
    print(f"wrote {series.shape[0]} frames of "
          f"{args.rows}x{args.cols} to {args.output}")
    return 0


def cmd_build(args) -> int:
    series = dataio.read_grid(args.input)
    struct = TK2Raster.build(series, k=args.k, t_delta=args.t_delta,
                             auto_snapshot=args.auto_snapshot,
                             auto_threshold=args.auto_threshold)
    dataio.write_container(args.output, struct)
    info = struct.stats()
    snapshots_only = len(dataio.serialize(
        TK2Raster.build(series, k=args.k, t_delta=1)))
    report = {
        "output": str(args.output),
        "tau": info["tau"],
        "t_delta": info["t_delta"],
        "total_bytes": info["total_bytes"],
        "all_snapshot_bytes": snapshots_only,
        "ratio_vs_all_snapshots": info["total_bytes"] / snapshots_only,
        "frames": info["frames"],
    }
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for fr in info["frames"]:
            print(f"frame {fr['t']:4d}  {fr['kind']:8s}  {fr['bytes']} bytes")
        print(f"total {info['total_bytes']} bytes "
              f"({report['ratio_vs_all_snapshots']:.3f}x all-snapshots)")
    return 0


def cmd_get_cell(args) -> int:
    struct = _load_series(args.container)
    print(struct.get_cell_value(args.row, args.col, args.t))
    return 0


def cmd_get_cells(args) -> int:
    struct = _load_series(args.container)
    r1, r2, c1, c2 = args.window
    cells = struct.get_cells(args.vb, args.ve, r1, r2, c1, c2, args.t)
    for r, c in sorted(cells):
        print(f"{r} {c}")
    return 0


def cmd_decompress(args) -> int:
    struct = _load_series(args.container)
    if args.frame is not None:
        frames = [struct.decompress_frame(args.frame)]
    else:
        frames = [struct.decompress_frame(t) for t in range(struct.tau)]
    dataio.write_grid(args.output, frames)
    print(f"wrote {len(frames)} frames to {args.output}")
    return 0


def cmd_stats(args) -> int:
    struct = _load_series(args.container)
    info = struct.stats()
    if args.json:
        print(json.dumps(info, indent=2))
        return 0
    print(f"{info['rows']}x{info['cols']} cells, tau={info['tau']}, "
          f"k={info['k']}, t_delta={info['t_delta'] or 'adaptive'}")
    for fr in info["frames"]:
        print(f"frame {fr['t']:4d}  {fr['kind']:8s}  "
              f"{fr['bytes']:10d} bytes  {fr['nodes']} nodes")
    print(f"total {info['total_bytes']} bytes")
    return 0


def _percentile(us: list[float], q: float) -> float:
    return float(np.percentile(np.array(us), q))


def _time_each(fn, queries) -> list[float]:
    times = []
    for q in queries:
        start = time.perf_counter_ns()
        fn(*q)
        times.append((time.perf_counter_ns() - start) / 1000.0)
    return times


def _summary(times: list[float]) -> dict:
    return {
        "count": len(times),
        "mean_us": float(np.mean(times)),
        "p50_us": _percentile(times, 50),
        "p99_us": _percentile(times, 99),
    }


def make_queries(struct: TK2Raster, n_cell: int, n_range: int, seed: int,
                 t_pool=None):
    """Deterministic random query sets against a built series."""
    rng = np.random.default_rng(seed)
    rows, cols, tau = struct.rows, struct.cols, struct.tau
    pool = list(t_pool) if t_pool is not None else list(range(tau))
    cell_qs = []
    for _ in range(n_cell):
        t = pool[rng.integers(len(pool))]
        cell_qs.append((int(rng.integers(rows)), int(rng.integers(cols)), t))
    range_qs = []
    sizes = [4, 16, 64, max(rows, cols)]
    for _ in range(n_range):
        t = pool[rng.integers(len(pool))]
        w = int(rng.choice(sizes))
        h = min(w, rows)
        w = min(w, cols)
        r1 = int(rng.integers(rows - h + 1))
        c1 = int(rng.integers(cols - w + 1))
        probe = struct.get_cell_value(int(rng.integers(rows)),
                                      int(rng.integers(cols)), t)
        span = int(rng.integers(1, 5))
        range_qs.append((probe, probe + span - 1,
                         r1, r1 + h - 1, c1, c1 + w - 1, t))
    return cell_qs, range_qs


def run_bench(struct: TK2Raster, baseline: TK2Raster | None, n_queries: int,
              repetitions: int, seed: int, t_pool=None) -> dict:
    """Time identical query sets against a series and an optional baseline."""
    cell_qs, range_qs = make_queries(struct, n_queries, n_queries, seed, t_pool)
    cell_times: list[float] = []
    range_times: list[float] = []
    base_cell: list[float] = []
    base_range: list[float] = []
    for _ in range(repetitions):
        cell_times += _time_each(struct.get_cell_value, cell_qs)
        range_times += _time_each(struct.get_cells, range_qs)
        if baseline is not None:
            base_cell += _time_each(baseline.get_cell_value, cell_qs)
            base_range += _time_each(baseline.get_cells, range_qs)
    report = {
        "repetitions": repetitions,
        "cell": _summary(cell_times),
        "range": _summary(range_times),
    }
    if baseline is not None:
        report["baseline_cell"] = _summary(base_cell)
        report["baseline_range"] = _summary(base_range)
        report["cell_ratio"] = report["cell"]["mean_us"] / report["baseline_cell"]["mean_us"]
        report["range_ratio"] = report["range"]["mean_us"] / report["baseline_range"]["mean_us"]
    return report


def cmd_bench(args) -> int:
    struct = _load_series(args.container)
    seed = args.seed if args.seed is not None else _default_seed()
    baseline = None
    if not args.no_baseline:
        series = [struct.decompress_frame(t) for t in range(struct.tau)]
        baseline = TK2Raster.build(series, k=struct.k, t_delta=1)
    report = run_bench(struct, baseline, args.queries, args.repetitions, seed)
    if args.json:
        print(json.dumps(report, indent=2))
        return 0
    for name in ("cell", "range", "baseline_cell", "baseline_range"):
        if name in report:
            s = report[name]
            print(f"{name:14s} mean {s['mean_us']:9.1f} us   "
                  f"p50 {s['p50_us']:9.1f} us   p99 {s['p99_us']:9.1f} us")
    if "cell_ratio" in report:
        print(f"cell ratio vs per-frame snapshots:  {report['cell_ratio']:.2f}x")
        print(f"range ratio vs per-frame snapshots: {report['range_ratio']:.2f}x")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="traster",
        description="Compress time-evolving integer grids and query them in place.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic series as a grid file")
    p.add_argument("output")
    p.add_argument("--rows", type=int, default=64)
    p.add_argument("--cols", type=int, default=64)
    p.add_argument("--steps", type=int, default=100,
                   help="interpolation steps between two random endpoints")
    p.add_argument("--take", type=int, default=None,
                   help="keep only the first N frames")
    p.add_argument("--value-range", type=int, nargs=2, default=(0, 500),
                   metavar=("LO", "HI"))
    p.add_argument("--smoothness", type=int, default=3)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("build", help="compress a grid file into a container")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--t-delta", type=int, default=6)
    p.add_argument("--auto-snapshot", action="store_true",
                   help="place snapshots adaptively instead of every t-delta frames")
    p.add_argument("--auto-threshold", type=float, default=0.8)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("get-cell", help="value of one cell at one instant")
    p.add_argument("container")
    p.add_argument("-t", type=int, required=True)
    p.add_argument("-r", "--row", type=int, required=True)
    p.add_argument("-c", "--col", type=int, required=True)
    p.set_defaults(fn=cmd_get_cell)

    p = sub.add_parser("get-cells",
                       help="cells in a window whose value lies in a range")
    p.add_argument("container")
    p.add_argument("-t", type=int, required=True)
    p.add_argument("--vb", type=int, required=True)
    p.add_argument("--ve", type=int, required=True)
    p.add_argument("--window", type=int, nargs=4, required=True,
                   metavar=("R1", "R2", "C1", "C2"))
    p.set_defaults(fn=cmd_get_cells)

    p = sub.add_parser("decompress", help="expand a container to a grid file")
    p.add_argument("container")
    p.add_argument("output")
    p.add_argument("--frame", type=int, default=None,
                   help="extract a single instant")
    p.set_defaults(fn=cmd_decompress)

    p = sub.add_parser("stats", help="per-frame size breakdown")
    p.add_argument("container")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("bench", help="time random queries against a container")
    p.add_argument("container")
    p.add_argument("--queries", type=int, default=200)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-baseline", action="store_true",
                   help="skip the per-frame-snapshot comparison build")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (OSError, ValueError, IndexError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
