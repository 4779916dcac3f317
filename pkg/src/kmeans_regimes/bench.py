"""Benchmark sweeps: the same problem under every allowed regime and worker count.

Every run in a sweep must produce identical labels before any timing is
reported; host paths are compared bit-exactly. Speedups are reported against
the single-worker regime, both for total wall time and for the assign/update
loop alone (the loop is where parallelism pays; seeding is dominated by the
one-off diameter scan).
"""

import hashlib
import statistics
import time

import numpy as np

from .device import run_gpu
from .engine import run_single
from .exceptions import OutputMismatchError
from .partition import run_multi
from .regimes import Regime, allowed_regimes
from .report import PhaseTimings


def _execute(regime, dataset, config, workers, device):
    timings = PhaseTimings()
    t0 = time.perf_counter()
    if regime is Regime.SINGLE:
        result = run_single(dataset, config, timings=timings)
    elif regime is Regime.MULTI:
        result = run_multi(dataset, config, workers, timings=timings)
    else:
        result = run_gpu(dataset, config, workers, device, timings=timings)
    total_ms = (time.perf_counter() - t0) * 1000.0
    return result, timings, total_ms


def _check_labels(reference, result, regime, workers):
    labels = result.assignment.labels
    if reference is None:
        return labels
    if not np.array_equal(reference, labels):
        diff = np.flatnonzero(reference != labels)
        raise OutputMismatchError(
            f"regime {regime}({workers} workers) produced labels differing from "
            f"the first run at {diff.size} of {labels.size} samples "
            f"(first difference at sample {diff[0]})"
        )
    return reference


def run_bench(dataset, config, workers, repeats=3, device=None):
    """Sweep the allowed regimes and worker counts, returning result records.

    ``workers`` lists the worker counts for the parallel regimes (the
    single-worker regime always runs with 1). Each combination runs
    ``repeats`` times; medians are reported. All runs must agree on labels or
    the sweep aborts.
    """
    allowed = allowed_regimes(dataset.n)
    sweep = []
    if Regime.SINGLE in allowed:
        sweep.append((Regime.SINGLE, 1))
    if Regime.MULTI in allowed:
        sweep.extend((Regime.MULTI, w) for w in workers)
    if Regime.GPU in allowed and device is not None:
        sweep.extend((Regime.GPU, w) for w in workers)

    records = []
    reference = None
    single_total = None
    single_loop = None
    for regime, w in sweep:
        totals, loops, phase_lists = [], [], {"diameter": [], "init": [], "assign": [], "update": []}
        iterations = converged = None
        for _ in range(repeats):
            result, timings, total_ms = _execute(regime, dataset, config, w, device)
            reference = _check_labels(reference, result, regime.value, w)
            totals.append(total_ms)
            loops.append(timings.get("assign") + timings.get("update"))
            for name in phase_lists:
                phase_lists[name].append(timings.get(name))
            iterations = result.iterations
            converged = result.converged
        record = {
            "regime": regime.value,
            "n_workers": w,
            "repeats": repeats,
            "iterations": iterations,
            "converged": converged,
            "median_total_ms": statistics.median(totals),
            "median_loop_ms": statistics.median(loops),
            "labels_sha256": hashlib.sha256(reference.tobytes()).hexdigest(),
        }
        for name, values in phase_lists.items():
            record[f"median_{name}_ms"] = statistics.median(values)
        if regime is Regime.SINGLE:
            single_total = record["median_total_ms"]
            single_loop = record["median_loop_ms"]
        if single_total is not None:
            record["speedup_total"] = single_total / record["median_total_ms"]
            record["speedup_loop"] = (
                single_loop / record["median_loop_ms"]
                if record["median_loop_ms"] > 0
                else float("inf")
            )
        records.append(record)
    return records


def format_table(records):
    """Human-readable sweep summary; the JSON report stays the machine format."""
    header = (
        f"{'regime':<8} {'workers':>7} {'total ms':>12} {'loop ms':>12} "
        f"{'speedup':>8} {'loop speedup':>13}"
    )
    lines = [header, "-" * len(header)]
    for r in records:
        lines.append(
            f"{r['regime']:<8} {r['n_workers']:>7} {r['median_total_ms']:>12.2f} "
            f"{r['median_loop_ms']:>12.2f} {r.get('speedup_total', 1.0):>8.2f} "
            f"{r.get('speedup_loop', 1.0):>13.2f}"
        )
    return "\n".join(lines)
