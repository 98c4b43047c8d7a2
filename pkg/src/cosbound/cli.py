"""Command-line interface.

Subcommands: surface, report, stability, bench, build, query, oracle-check.
Results go to stdout or --out; progress logs go to stderr. Exit codes:
0 success, 1 usage error, 2 data error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from . import analysis, bench, io, storage
from .bounds import BoundKind
from .errors import (
    BadK,
    BadPivotCount,
    ChecksumMismatch,
    CosboundError,
    DataFormatError,
    ZeroVector,
)
from .index import (
    Dataset,
    VpTree,
    laesa_build,
    laesa_knn_query,
    laesa_range_query,
    oracle_check,
    vp_build,
    vp_knn_query,
    vp_range_query,
)
from .vectors import normalize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors by default; this tool reserves 2 for
    data errors, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _UsageError(Exception):
    """Flag-level problem detected after parsing; message names the flag."""


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _out_stream(args):
    return open(args.out, "w", encoding="ascii", newline="") if args.out else sys.stdout


def _grid_spec(args) -> analysis.GridSpec:
    try:
        return analysis.GridSpec(lo=args.lo, hi=args.hi, steps=args.steps)
    except ValueError as e:
        raise _UsageError(f"--lo/--hi/--steps: {e}") from None


def _load_vectors(args) -> Dataset:
    raw = io.load_dense(args.infile) if args.format == "dense" else io.load_sparse(args.infile)
    units = []
    for lineno, v in enumerate(raw, start=1):
        try:
            units.append(normalize(v))
        except ZeroVector:
            raise DataFormatError(f"{args.infile}:{lineno}: zero vector cannot be normalized") from None
    return Dataset(units)


def cmd_surface(args) -> int:
    try:
        kind = BoundKind(args.bound)
    except ValueError:
        raise _UsageError(f"--bound: unknown kind {args.bound!r}") from None
    spec = _grid_spec(args)
    matrix = analysis.surface(kind, spec)
    f = _out_stream(args)
    try:
        analysis.write_surface_csv(f, spec, matrix)
    finally:
        if f is not sys.stdout:
            f.close()
    return EXIT_OK


def cmd_report(args) -> int:
    spec = _grid_spec(args)
    started = time.perf_counter()
    report = analysis.average_report(spec)
    _log(f"report: {spec.steps}x{spec.steps} grid in {time.perf_counter() - started:.2f}s")
    pairs = [
        ("grid_lo", spec.lo),
        ("grid_hi", spec.hi),
        ("grid_steps", spec.steps),
        ("euclidean_mean", report.euclidean_mean),
        ("arccos_mean", report.arccos_mean),
        ("arccos_gain_pct", report.arccos_gain * 100.0),
        ("max_abs_diff_mult_arccos", report.max_abs_mult_arccos),
        ("ordering_violations", report.ordering_violations),
    ]
    f = _out_stream(args)
    try:
        analysis.write_report_csv(f, pairs)
    finally:
        if f is not sys.stdout:
            f.close()
    return EXIT_OK


def cmd_stability(args) -> int:
    spec = _grid_spec(args)
    report = analysis.stability_report(spec)
    pairs = [
        ("grid_lo", spec.lo),
        ("grid_hi", spec.hi),
        ("grid_steps", spec.steps),
        ("max_abs_diff_mult_arccos", report.max_abs_mult_arccos),
        ("max_abs_diff_variant_mult", report.max_abs_variant_mult),
    ]
    f = _out_stream(args)
    try:
        analysis.write_report_csv(f, pairs)
    finally:
        if f is not sys.stdout:
            f.close()
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        config = bench.BenchConfig(
            array_size=args.size,
            warmup_iters=args.warmup,
            measure_iters=args.iters,
            iter_duration_target=args.target,
            seed=args.seed,
        )
    except ValueError as e:
        raise _UsageError(f"--size/--warmup/--iters/--target: {e}") from None
    report = bench.run_bench(config)
    sys.stdout.write(bench.format_report(report))
    if args.out:
        bench.write_bench_csv(args.out, report)
        _log(f"bench: csv written to {args.out}")
    return EXIT_OK


def cmd_build(args) -> int:
    ds = _load_vectors(args)
    started = time.perf_counter()
    if args.index == "vp":
        if args.leaf_capacity < 1:
            raise _UsageError(f"--leaf-capacity: must be >= 1, got {args.leaf_capacity}")
        index = vp_build(ds, leaf_capacity=args.leaf_capacity, seed=args.seed)
        storage.save_index(args.out, index)
    else:
        try:
            index = laesa_build(ds, args.pivots, seed=args.seed)
        except BadPivotCount as e:
            raise _UsageError(f"--pivots: {e}") from None
        storage.save_index(args.out, index, ds)
    _log(
        f"build: {args.index} index over n={len(ds)} ({'sparse' if ds.is_sparse else 'dense'}, "
        f"dim={ds.dim}) in {time.perf_counter() - started:.2f}s -> {args.out}"
    )
    return EXIT_OK


def _parse_query_vector(text: str, ds: Dataset):
    try:
        vec = io.parse_sparse_line(text, "--q") if ds.is_sparse else io.parse_dense_line(text, "--q")
    except DataFormatError as e:
        raise _UsageError(str(e)) from None
    try:
        return normalize(vec)
    except ZeroVector as e:
        raise _UsageError(f"--q: {e}") from None


def _run_one_query(index, ds: Dataset, q, args) -> dict:
    if args.k is not None:
        if isinstance(index, VpTree):
            results, stats = vp_knn_query(index, q, args.k)
        else:
            results, stats = laesa_knn_query(index, ds, q, args.k)
    else:
        tau = args.tau if args.tau is not None else math.cos(math.radians(args.tau_deg))
        if not -1.0 <= tau <= 1.0:
            raise _UsageError(f"--tau: {tau} outside [-1, 1]")
        if isinstance(index, VpTree):
            results, stats = vp_range_query(index, q, tau)
        else:
            results, stats = laesa_range_query(index, ds, q, tau)
    payload = {"results": [{"id": i, "similarity": s} for i, s in results]}
    if args.stats:
        payload["stats"] = {
            "sims_computed": stats.sims_computed,
            "nodes_pruned": stats.nodes_pruned,
            "candidates_filtered": stats.candidates_filtered,
        }
    return payload


def _load_query_file(path: str, ds: Dataset) -> list:
    parse = io.parse_sparse_line if ds.is_sparse else io.parse_dense_line
    out = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for lineno, raw in enumerate(f, start=1):
                line = raw.strip()
                where = f"{path}:{lineno}"
                if not line:
                    raise DataFormatError(f"{where}: blank line")
                try:
                    out.append(normalize(parse(line, where)))
                except ZeroVector:
                    raise DataFormatError(f"{where}: zero vector") from None
    except OSError as e:
        raise DataFormatError(f"{path}: {e.strerror or e}") from None
    if not out:
        raise DataFormatError(f"{path}: file holds no query vectors")
    return out


def cmd_query(args) -> int:
    index, ds = storage.load_index(args.index)
    try:
        if args.q is not None:
            payload = _run_one_query(index, ds, _parse_query_vector(args.q, ds), args)
        else:
            qs = _load_query_file(args.q_file, ds)
            payload = {"queries": [_run_one_query(index, ds, q, args) for q in qs]}
    except BadK as e:
        raise _UsageError(f"--k: {e}") from None
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    ds = _load_vectors(args)
    try:
        report = oracle_check(
            ds,
            queries=args.queries,
            seed=args.seed,
            k=args.k,
            leaf_capacity=args.leaf_capacity,
            pivots=args.pivots,
            selectivity=args.selectivity,
        )
    except (BadK, BadPivotCount, ValueError) as e:
        raise _UsageError(str(e)) from None
    pairs = [
        ("n", report.n),
        ("dim", report.dim),
        ("queries", report.queries),
        ("k", report.k),
        ("mean_tau", report.mean_tau),
        ("mean_matches", report.mean_matches),
        ("mean_sims_vp_range", report.mean_sims["vp_range"]),
        ("mean_sims_vp_knn", report.mean_sims["vp_knn"]),
        ("mean_sims_laesa_range", report.mean_sims["laesa_range"]),
        ("mean_sims_laesa_knn", report.mean_sims["laesa_knn"]),
        ("mismatches", report.mismatches),
    ]
    analysis.write_report_csv(sys.stdout, pairs)
    if not report.ok:
        _log(f"oracle-check: {report.mismatches} mismatches against the linear scan")
        return EXIT_VERIFY
    return EXIT_OK


def _add_grid_flags(p, default_steps: int):
    p.add_argument("--lo", type=float, default=-1.0, help="grid lower endpoint (default -1)")
    p.add_argument("--hi", type=float, default=1.0, help="grid upper endpoint (default 1)")
    p.add_argument("--steps", type=int, default=default_steps,
                   help=f"grid points per axis (default {default_steps})")


def build_parser() -> _Parser:
    parser = _Parser(prog="cosbound", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("surface", help="emit a bound surface as CSV")
    p.add_argument("--bound", required=True, choices=[k.value for k in BoundKind])
    _add_grid_flags(p, 201)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("report", help="average bound quality over the default grid")
    _add_grid_flags(p, 2001)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("stability", help="max disagreement between closed-form and trig bounds")
    _add_grid_flags(p, 2001)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("bench", help="per-pair evaluation cost of each bound")
    p.add_argument("--size", type=int, default=2_000_000, help="number of input pairs")
    p.add_argument("--warmup", type=int, default=5, help="warmup iterations")
    p.add_argument("--iters", type=int, default=10, help="measurement iterations")
    p.add_argument("--target", type=float, default=0.25, help="seconds per measurement iteration")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", help="also write subject,mean_ns,stddev_ns CSV here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("build", help="build and save a search index")
    p.add_argument("--in", dest="infile", required=True, help="input dataset file")
    p.add_argument("--format", required=True, choices=["dense", "sparse"])
    p.add_argument("--index", required=True, choices=["vp", "laesa"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--leaf-capacity", type=int, default=16, help="vp tree leaf capacity")
    p.add_argument("--pivots", type=int, default=16, help="pivot count for laesa")
    p.add_argument("--out", required=True, help="index file to write")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="query a saved index")
    p.add_argument("--index", required=True, help="index file from `build`")
    qgroup = p.add_mutually_exclusive_group(required=True)
    qgroup.add_argument("--q", help="inline query vector (csv components, or index:value tokens)")
    qgroup.add_argument("--q-file", help="file of query vectors, one per line")
    tgroup = p.add_mutually_exclusive_group(required=True)
    tgroup.add_argument("--tau", type=float, help="similarity threshold in [-1, 1]")
    tgroup.add_argument("--tau-deg", type=float, help="angle threshold in degrees; tau = cos(angle)")
    tgroup.add_argument("--k", type=int, help="return the k most similar points")
    p.add_argument("--stats", action="store_true", help="include per-query work counters")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("oracle-check", help="verify index answers against a linear scan")
    p.add_argument("--in", dest="infile", required=True, help="input dataset file")
    p.add_argument("--format", default="dense", choices=["dense", "sparse"])
    p.add_argument("--queries", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--leaf-capacity", type=int, default=16)
    p.add_argument("--pivots", type=int, default=16)
    p.add_argument("--selectivity", type=float, default=0.01,
                   help="range threshold picks this fraction of points per query")
    p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except _UsageError as e:
        _log(f"cosbound {args.command}: error: {e}")
        return EXIT_USAGE
    except ChecksumMismatch as e:
        _log(f"cosbound {args.command}: verification failure: {e}")
        return EXIT_VERIFY
    except CosboundError as e:
        _log(f"cosbound {args.command}: data error: {e}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
