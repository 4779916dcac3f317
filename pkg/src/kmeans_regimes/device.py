"""Accelerator offload: device jobs for the heavy reductions, assignment on host.

Workers package the max-distance scan and the coordinate/cluster sums as jobs,
submit them to a device, and merge the collected partials exactly as the
multi-worker regime does. Nearest-center assignment never leaves the host.

Sum jobs cover block-aligned sample ranges and their results keep the
per-block partials (leading block axis) instead of one collapsed sum. That
makes device merges pure assembly: splitting a job at a block boundary and
concatenating the results is bit-identical to the unsplit job, and the final
fold on the host is the same one every other regime runs.

The host reference device executes jobs synchronously on the submitting
worker's thread through the same compiled kernels, which is what makes the
offload regime bit-identical to the multi-worker one when no accelerator is
present.
"""

import itertools
import os
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .engine import (
    DiameterResult,
    KmeansResult,
    _finish_update,
    init_centers,
    iterate,
    scan_rows,
)
from .exceptions import (
    CapacityExceededError,
    ContractViolationError,
    DeviceLostError,
    DeviceUnavailableError,
    DoubleCollectError,
    InsufficientDataError,
    UnknownTicketError,
    ValidationFailureError,
)
from .model import DEFAULT_BLOCK, Dataset, block_bounds, fold_blocks
from .report import PhaseTimings
from .partition import (
    PartialMax,
    PartialSums,
    _block_spans,
    _run_tasks,
    _split_rows,
    assemble_partials,
    assign_parallel,
    merge_max,
    plan_chunks,
    run_multi,
)
from .validation import check_labels

MAX_PAIR = "max-pair-distance"
COORD_SUM = "coordinate-sum"
CLUSTER_SUM = "cluster-sum"

JOB_KINDS = (MAX_PAIR, COORD_SUM, CLUSTER_SUM)


@dataclass
class DeviceJob:
    """One unit of device work over a read-only slice of the dataset.

    ``max-pair-distance`` scans the given rows against all columns j > i of
    the transposed coordinate buffer. The two sum kinds cover the sample
    range [start, stop), which must begin on an accumulation-block boundary;
    ``cluster-sum`` additionally carries labels and k.
    """

    kind: str
    n: int
    m: int
    coords: Optional[np.ndarray] = None
    coords_t: Optional[np.ndarray] = None
    rows: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None
    start: int = 0
    stop: int = 0
    block: int = DEFAULT_BLOCK
    k: int = 0

    def nbytes(self):
        """Bytes of buffer the device must hold to run this job."""
        total = 0
        for buf in (self.coords, self.coords_t, self.rows, self.labels):
            if buf is not None:
                total += buf.nbytes
        return total


@dataclass
class DeviceResult:
    """Result of one device job, mirroring the host partial shapes.

    ``pair`` is the best pair for a max-distance job (None when the row set
    produced no pair); ``partial`` holds per-block sums (and counts for
    cluster sums) for the job's range.
    """

    kind: str
    pair: Optional[PartialMax] = None
    partial: Optional[PartialSums] = None


def max_pair_job(coords_t, rows, n):
    m = coords_t.shape[0]
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size and (rows.min() < 0 or rows.max() >= n):
        raise ContractViolationError(f"scan rows must lie in [0, {n})")
    return DeviceJob(MAX_PAIR, n, m, coords_t=coords_t, rows=rows)


def coord_sum_job(coords, start, stop, block=DEFAULT_BLOCK):
    n, m = coords.shape
    _check_range(start, stop, n, block)
    return DeviceJob(COORD_SUM, n, m, coords=coords, start=start, stop=stop, block=block)


def cluster_sum_job(coords, labels, k, start, stop, block=DEFAULT_BLOCK):
    n, m = coords.shape
    _check_range(start, stop, n, block)
    if k < 1:
        raise ContractViolationError(f"k must be >= 1, got {k}")
    return DeviceJob(
        CLUSTER_SUM, n, m, coords=coords, labels=labels, start=start, stop=stop,
        block=block, k=k,
    )


def _check_range(start, stop, n, block):
    if not 0 <= start <= stop <= n:
        raise ContractViolationError(
            f"job range [{start}, {stop}) must lie within [0, {n}]"
        )
    if block < 1:
        raise ContractViolationError(f"block size must be >= 1, got {block}")
    if start % block != 0:
        raise ContractViolationError(
            f"job range must start on an accumulation-block boundary "
            f"(start={start}, block={block})"
        )


class Device:
    """Base device: ticket bookkeeping and capacity checks around `_execute`.

    ``submit`` validates the job against the device's buffer capability and
    hands out a unique ticket; ``collect`` delivers each result exactly once.
    Both are safe to call from concurrent workers. Subclasses implement
    ``_execute(job) -> DeviceResult``.
    """

    name = "abstract"

    def __init__(self, max_buffer_bytes=16 << 30, preferred_block=DEFAULT_BLOCK):
        self.max_buffer_bytes = max_buffer_bytes
        self.preferred_block = preferred_block
        self._lock = threading.Lock()
        self._tickets = itertools.count(1)
        self._pending = {}
        self._collected = set()

    def submit(self, job):
        if job.kind not in JOB_KINDS:
            raise ContractViolationError(f"unknown job kind {job.kind!r}")
        if job.nbytes() > self.max_buffer_bytes:
            raise CapacityExceededError(
                f"job needs {job.nbytes()} bytes, device holds "
                f"{self.max_buffer_bytes}; split the range"
            )
        result = self._execute(job)
        with self._lock:
            ticket = next(self._tickets)
            self._pending[ticket] = result
        return ticket

    def collect(self, ticket):
        with self._lock:
            if ticket in self._pending:
                self._collected.add(ticket)
                return self._pending.pop(ticket)
            if ticket in self._collected:
                raise DoubleCollectError(f"ticket {ticket} was already collected")
        raise UnknownTicketError(f"ticket {ticket} was never issued by this device")

    def outstanding(self):
        """Number of submitted-but-uncollected tickets (0 after a clean run)."""
        with self._lock:
            return len(self._pending)

    def _execute(self, job):
        raise NotImplementedError


class HostReferenceDevice(Device):
    """Fallback device that runs jobs on the host through the shared kernels.

    Execution happens synchronously on the submitting thread (the kernels
    release the GIL, so concurrent submitters still overlap), and the partials
    are exactly the ones the multi-worker regime would compute.
    """

    name = "reference"

    def _execute(self, job):
        if job.kind == MAX_PAIR:
            d2, i, j = _kernels.max_pair_rows(job.coords_t, job.rows, job.n)
            pair = PartialMax(d2, int(i), int(j)) if d2 >= 0.0 else None
            return DeviceResult(MAX_PAIR, pair=pair)

        first_block = job.start // job.block
        bounds = [
            (s, min(s + job.block, job.stop))
            for s in range(job.start, job.stop, job.block)
        ]
        if job.kind == COORD_SUM:
            sums = np.zeros((len(bounds), job.m), dtype=np.float64)
            for b, (s, e) in enumerate(bounds):
                _kernels.coord_sums_block(job.coords, s, e, sums[b])
            return DeviceResult(COORD_SUM, partial=PartialSums(first_block, sums))

        sums = np.zeros((len(bounds), job.k, job.m), dtype=np.float64)
        counts = np.zeros((len(bounds), job.k), dtype=np.int64)
        for b, (s, e) in enumerate(bounds):
            bad = _kernels.cluster_sums_block(job.coords, job.labels, s, e, sums[b], counts[b])
            if bad >= 0:
                raise ValidationFailureError(
                    f"label out of range [0, {job.k}) at sample {bad}"
                )
        return DeviceResult(CLUSTER_SUM, partial=PartialSums(first_block, sums, counts))


def get_device(name, *, runner=None):
    """Look up a device implementation by configured name.

    "reference" always works; "gpu" needs an accelerator runner (probed via
    the CLUSTER_GPU_RUNNER command unless given explicitly) and raises
    DeviceUnavailable when none is present.
    """
    if name == "reference":
        return HostReferenceDevice()
    if name == "gpu":
        runner = runner or os.environ.get("CLUSTER_GPU_RUNNER")
        if not runner:
            raise DeviceUnavailableError(
                "no accelerator runner configured; set CLUSTER_GPU_RUNNER to the "
                "runner command or use the reference device"
            )
        from .bridge import BridgeDevice

        return BridgeDevice(runner)
    raise DeviceUnavailableError(f"no device named {name!r}")


def _offload(device, jobs):
    """Submit one worker's jobs and collect their results in order."""
    tickets = [device.submit(job) for job in jobs]
    return [device.collect(t) for t in tickets]


def _diameter_offloaded(dataset, plan, device, coords_t, *, pair_cap, balanced, executor):
    if dataset.n < 2:
        raise InsufficientDataError(
            f"diameter needs at least 2 samples, got {dataset.n}"
        )
    rows = scan_rows(dataset.n, pair_cap)
    parts = _split_rows(rows, plan.n_workers, balanced)
    n = dataset.n

    def worker(part):
        results = _offload(device, [max_pair_job(coords_t, part, n)])
        return results[0].pair

    best = None
    for pair in _run_tasks(executor, [lambda p=p: worker(p) for p in parts]):
        best = merge_max(best, pair)
    return DiameterResult(float(np.sqrt(best.d2)), best.i, best.j)


def _span_range(bounds, span):
    """Sample range covered by a contiguous span of block indices."""
    return bounds[span[0]][0], bounds[span[-1]][1]


def _centroid_offloaded(dataset, plan, device, *, block, executor):
    bounds = block_bounds(dataset.n, block)
    spans = [s for s in _block_spans(len(bounds), plan.n_workers) if s.size]

    def worker(span):
        start, stop = _span_range(bounds, span)
        return _offload(device, [coord_sum_job(dataset.coords, start, stop, block)])[0]

    results = _run_tasks(executor, [lambda s=s: worker(s) for s in spans])
    sums = np.zeros((len(bounds), dataset.m), dtype=np.float64)
    assemble_partials([r.partial for r in results], sums)
    return fold_blocks(sums) / dataset.n


def _update_offloaded(dataset, assignment, k, plan, device, *, block, executor):
    labels = check_labels(assignment.labels, n=dataset.n, k=k, name="labels")
    bounds = block_bounds(dataset.n, block)
    spans = [s for s in _block_spans(len(bounds), plan.n_workers) if s.size]

    def worker(span):
        start, stop = _span_range(bounds, span)
        return _offload(
            device, [cluster_sum_job(dataset.coords, labels, k, start, stop, block)]
        )[0]

    results = _run_tasks(executor, [lambda s=s: worker(s) for s in spans])
    sums = np.zeros((len(bounds), k, dataset.m), dtype=np.float64)
    counts = np.zeros((len(bounds), k), dtype=np.int64)
    assemble_partials([r.partial for r in results], sums, counts)
    return _finish_update(dataset, assignment, k, sums, counts)


def _run_offloaded(dataset, config, n_workers, device, timings):
    from concurrent.futures import ThreadPoolExecutor

    plan = plan_chunks(dataset.n, n_workers)
    coords_t = np.ascontiguousarray(dataset.coords.T)
    t = timings
    pool = ThreadPoolExecutor(max_workers=plan.n_workers) if plan.n_workers > 1 else None
    try:
        with t.phase("diameter"):
            diam = _diameter_offloaded(
                dataset,
                plan,
                device,
                coords_t,
                pair_cap=config.diameter_pair_cap,
                balanced=config.balanced_rows,
                executor=pool,
            )
        with t.phase("init"):
            centroid = _centroid_offloaded(
                dataset, plan, device, block=config.accum_block, executor=pool
            )
            model = init_centers(dataset, config, diam, centroid)
        model, assignment, iterations, done, history = iterate(
            dataset,
            config,
            model,
            t.wrap("assign", lambda m: assign_parallel(dataset, m, plan, executor=pool)),
            t.wrap("update", lambda a: _update_offloaded(
                dataset, a, config.k, plan, device,
                block=config.accum_block, executor=pool,
            )),
        )
    finally:
        if pool is not None:
            pool.shutdown(wait=True)
    return KmeansResult(model, assignment, iterations, done, diam, centroid, history)


def run_gpu(dataset, config, n_workers, device, *, timings=None):
    """Cluster in the offload regime: reductions on the device, the rest on host.

    Diameter and sum reductions go through device jobs issued by the worker
    threads; assignment, initial centers and the convergence check stay on the
    host. If the device is lost mid-run, the run transparently restarts in the
    multi-worker regime and records why.
    """
    if not isinstance(dataset, Dataset):
        dataset = Dataset(dataset)
    config.validate_for(dataset)
    t = timings if timings is not None else PhaseTimings()
    try:
        return _run_offloaded(dataset, config, n_workers, device, t)
    except DeviceLostError as exc:
        result = run_multi(dataset, config, n_workers, timings=timings)
        result.fallback_reason = f"device lost ({exc}); reran in the multi-worker regime"
        return result
