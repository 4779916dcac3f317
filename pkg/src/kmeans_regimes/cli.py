"""Command-line frontend.

``cluster`` runs one clustering job and writes labels, centers, and a JSON
run report; ``cluster bench`` sweeps the allowed regimes and worker counts
over the same problem and writes a speedup report. Exit codes: 0 success,
2 usage error, 3 data error, 4 regime not allowed, 5 device unavailable,
6 regime output mismatch.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from .bench import format_table, run_bench
from .datasets import generate_synthetic, load_dataset
from .device import get_device, run_gpu
from .engine import KmeansConfig, run_single
from .exceptions import (
    ContractViolationError,
    DataFormatError,
    DegenerateDataError,
    DeviceUnavailableError,
    InsufficientDataError,
    OutputMismatchError,
    RegimeNotAllowedError,
)
from .model import wcss
from .partition import run_multi
from .regimes import Regime, select
from .report import PhaseTimings, RunReport

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_REGIME = 4
EXIT_DEVICE = 5
EXIT_MISMATCH = 6


def _add_common_args(parser):
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="comma-separated numeric text file")
    src.add_argument(
        "--synthetic",
        metavar="N,M,K_TRUE,SPREAD",
        help="generate Gaussian blobs instead of reading a file",
    )
    parser.add_argument("--k", type=int, required=True, help="number of clusters")
    parser.add_argument(
        "--regime",
        choices=["auto", "single", "multi", "gpu"],
        default="auto",
        help="execution regime (default: auto)",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker count for the parallel regimes (default: hardware)",
    )
    parser.add_argument("--tol", type=float, default=0.0, help="convergence tolerance")
    parser.add_argument("--max-iters", type=int, default=1000, help="iteration cap")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for synthetic data and random-far seeding")
    parser.add_argument("--init", choices=["maximin", "random-far"], default="maximin",
                        help="initial-center strategy")
    parser.add_argument("--device", choices=["reference", "gpu"], default="reference",
                        help="device for the offload regime")
    parser.add_argument("--header", action="store_true",
                        help="input file has a header row to skip")
    parser.add_argument("--id-column", action="store_true",
                        help="input rows start with an id column to drop")
    parser.add_argument("--auto-prefer", choices=["gpu", "multi"], default="gpu",
                        help="cap automatic regime selection (default: gpu)")
    parser.add_argument("--accum-block", type=int, default=None,
                        help="accumulation block size (default: 65536)")
    parser.add_argument("--diameter-pair-cap", type=int, default=None,
                        help="cap pair evaluations in the diameter scan (approximate)")
    parser.add_argument("--balanced-rows", action="store_true",
                        help="balance diameter scan rows across workers")
    parser.add_argument("--track-wcss", action="store_true",
                        help="record the objective after every iteration")


def _parse_synthetic(parser, text):
    parts = text.split(",")
    if len(parts) != 4:
        parser.error(f"--synthetic expects N,M,K_TRUE,SPREAD, got {text!r}")
    try:
        return int(parts[0]), int(parts[1]), int(parts[2]), float(parts[3])
    except ValueError:
        parser.error(f"--synthetic expects numeric N,M,K_TRUE,SPREAD, got {text!r}")


def _get_dataset(parser, args):
    if args.synthetic:
        n, m, k_true, spread = _parse_synthetic(parser, args.synthetic)
        return generate_synthetic(n, m, k_true, args.seed, spread)
    return load_dataset(args.input, header=args.header, id_column=args.id_column)


def _make_config(args):
    extra = {}
    if args.accum_block is not None:
        extra["accum_block"] = args.accum_block
    return KmeansConfig(
        k=args.k,
        max_iters=args.max_iters,
        tol=args.tol,
        seed=args.seed,
        init=args.init,
        diameter_pair_cap=args.diameter_pair_cap,
        balanced_rows=args.balanced_rows,
        track_wcss=args.track_wcss,
        **extra,
    )


def _probe_device(args, requested):
    """Return the device object, or None when absent.

    Absence is reported by ``select``, which ranks a disallowed regime above a
    missing device, so no error is raised here.
    """
    needs_probe = requested is Regime.GPU or (
        requested is None and args.auto_prefer == "gpu"
    )
    if not needs_probe:
        return None
    try:
        return get_device(args.device)
    except DeviceUnavailableError:
        return None


def _run_command(argv):
    parser = argparse.ArgumentParser(
        prog="cluster", description="Cluster a dataset under one execution regime."
    )
    _add_common_args(parser)
    parser.add_argument("--labels-out", metavar="PATH", default="labels.txt",
                        help="output: one label per line (default: labels.txt)")
    parser.add_argument("--centers-out", metavar="PATH", default="centers.txt",
                        help="output: k rows of m coordinates (default: centers.txt)")
    parser.add_argument("--report-out", metavar="PATH", default="report.json",
                        help="output: JSON run report (default: report.json)")
    args = parser.parse_args(argv)

    dataset = _get_dataset(parser, args)
    config = _make_config(args)
    requested = None if args.regime == "auto" else Regime(args.regime)
    device = _probe_device(args, requested)
    plan = select(
        dataset.n,
        requested,
        args.threads,
        device is not None,
        auto_prefer=args.auto_prefer,
    )

    timings = PhaseTimings()
    t0 = time.perf_counter()
    if plan.regime is Regime.SINGLE:
        result = run_single(dataset, config, timings=timings)
    elif plan.regime is Regime.MULTI:
        result = run_multi(dataset, config, plan.n_workers, timings=timings)
    else:
        result = run_gpu(dataset, config, plan.n_workers, device, timings=timings)
    total_ms = (time.perf_counter() - t0) * 1000.0

    wcss_value = wcss(dataset, result.model, result.assignment,
                      block=config.accum_block)
    report = RunReport.from_run(
        result, config, plan.regime, plan.n_workers, dataset, wcss_value,
        timings, total_ms,
    )

    np.savetxt(args.labels_out, result.assignment.labels, fmt="%d")
    np.savetxt(args.centers_out, result.model.centers, fmt="%.17g", delimiter=",")
    with open(args.report_out, "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")

    print(
        f"regime={report.regime} workers={report.n_workers} n={report.n} "
        f"m={report.m} k={report.k} iterations={report.iterations} "
        f"converged={report.converged} wcss={report.wcss:.6g} "
        f"total_ms={report.total_ms:.1f}"
    )
    if report.fallback:
        print(f"note: {report.fallback}")
    print(f"wrote {args.labels_out}, {args.centers_out}, {args.report_out}")
    return EXIT_OK


def _bench_command(argv):
    parser = argparse.ArgumentParser(
        prog="cluster bench",
        description="Time the same problem under every allowed regime.",
    )
    _add_common_args(parser)
    parser.add_argument("--workers", default="1,2,4",
                        help="comma-separated worker counts to sweep (default: 1,2,4)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="runs per configuration; medians reported (default: 3)")
    parser.add_argument("--report-out", metavar="PATH", default="bench.json",
                        help="output: JSON speedup report (default: bench.json)")
    args = parser.parse_args(argv)

    try:
        workers = [int(w) for w in args.workers.split(",") if w.strip()]
    except ValueError:
        parser.error(f"--workers expects comma-separated integers, got {args.workers!r}")
    if not workers or any(w < 1 for w in workers):
        parser.error("--workers needs at least one positive worker count")
    if args.repeats < 1:
        parser.error("--repeats must be >= 1")

    dataset = _get_dataset(parser, args)
    config = _make_config(args)
    try:
        device = get_device(args.device)
    except DeviceUnavailableError:
        device = None

    records = run_bench(dataset, config, workers, repeats=args.repeats, device=device)
    with open(args.report_out, "w") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")
    print(format_table(records))
    print(f"wrote {args.report_out}")
    return EXIT_OK


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    try:
        if argv and argv[0] == "bench":
            return _bench_command(argv[1:])
        return _run_command(argv)
    except (DataFormatError, OSError, InsufficientDataError, DegenerateDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RegimeNotAllowedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except DeviceUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEVICE
    except OutputMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except ContractViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
