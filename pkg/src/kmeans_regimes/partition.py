"""Multi-worker clustering: 1/N data partitioning with ordered partial merges.

Workers split the sample range, compute partial results (max-distance pair,
block sums, label slices) concurrently, and the coordinator merges them after
the barrier. Two kinds of decomposition are in play and must not be confused:

* worker spans from ``plan_chunks`` decide who computes what;
* accumulation blocks (``accum_block`` rows) decide how float sums fold.

Block structure depends only on n, so sums come out bit-identical for every
worker count; the max-pair merge is a total order, so it is order-independent
outright. That is what makes this regime's output bit-equal to the
single-worker one.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .engine import (
    DiameterResult,
    KmeansResult,
    cluster_sum_partials,
    _finish_update,
    init_centers,
    iterate,
    scan_rows,
)
from .exceptions import InsufficientDataError
from .model import (
    DEFAULT_BLOCK,
    Assignment,
    Dataset,
    block_bounds,
    fold_blocks,
)
from .report import PhaseTimings
from .validation import check_labels, check_positive_int


@dataclass(frozen=True)
class ChunkPlan:
    """Ordered contiguous worker spans covering [0, n), sizes differing by <= 1."""

    n_workers: int
    chunks: tuple

    @property
    def n(self):
        return self.chunks[-1][1] if self.chunks else 0


@dataclass(frozen=True)
class PartialMax:
    """One worker's largest-distance pair, compared on the exact squared value."""

    d2: float
    i: int
    j: int

    @property
    def d(self):
        return float(np.sqrt(self.d2))


@dataclass
class PartialSums:
    """Per-block sums a worker produced for a contiguous span of blocks.

    ``sums`` has the block index as its leading axis: (blocks, k, m) for
    cluster sums with ``counts`` of shape (blocks, k), or (blocks, m) for
    plain coordinate sums with ``counts`` None. Merging partials is pure
    assembly by block index; all folding happens once, at the top.
    """

    first_block: int
    sums: np.ndarray
    counts: Optional[np.ndarray] = None


def plan_chunks(n, n_workers):
    """Split [0, n) into contiguous near-equal spans, one per worker.

    Worker count is clamped to n; the first n % workers spans get the extra
    sample.
    """
    n = check_positive_int(n, name="n")
    n_workers = check_positive_int(n_workers, name="n_workers")
    w = min(n_workers, n)
    base, extra = divmod(n, w)
    chunks = []
    start = 0
    for i in range(w):
        stop = start + base + (1 if i < extra else 0)
        chunks.append((start, stop))
        start = stop
    return ChunkPlan(w, tuple(chunks))


def merge_max(a, b):
    """Prefer the larger squared distance, then the smaller (i, j) pair."""
    if b is None:
        return a
    if a is None:
        return b
    if b.d2 > a.d2 or (b.d2 == a.d2 and (b.i, b.j) < (a.i, a.j)):
        return b
    return a


def _run_tasks(executor, tasks):
    """Run thunks, returning results in task order regardless of completion."""
    if executor is None:
        return [task() for task in tasks]
    futures = [executor.submit(task) for task in tasks]
    return [f.result() for f in futures]


def _split_rows(rows, n_workers, balanced):
    """Partition scan rows among workers.

    Contiguous splits by default. Balanced mode pairs the t-th row with the
    (last - t)-th so early (long) and late (short) upper-triangle rows share a
    worker; each worker's rows stay in ascending order either way.
    """
    if not balanced:
        return [part for part in np.array_split(rows, n_workers)]
    r = rows.shape[0]
    units = [
        rows[[t, r - 1 - t]] if t != r - 1 - t else rows[[t]]
        for t in range((r + 1) // 2)
    ]
    parts = []
    for unit_span in np.array_split(np.arange(len(units)), n_workers):
        if unit_span.size:
            part = np.sort(np.concatenate([units[u] for u in unit_span]))
        else:
            part = np.empty(0, dtype=np.int64)
        parts.append(part)
    return parts


def diameter_parallel(dataset, plan, *, pair_cap=None, balanced=False, executor=None):
    """Largest pairwise distance, computed by concurrent row-range scans.

    Each worker scans pairs (i, j) with i in its row set and j > i over the
    whole dataset; partials merge in worker order under the total order of
    ``merge_max``, so the result matches the single-worker scan bit for bit.
    """
    if dataset.n < 2:
        raise InsufficientDataError(
            f"diameter needs at least 2 samples, got {dataset.n}"
        )
    coords_t = np.ascontiguousarray(dataset.coords.T)
    rows = scan_rows(dataset.n, pair_cap)
    parts = _split_rows(rows, plan.n_workers, balanced)
    n = dataset.n

    def scan(part):
        return _kernels.max_pair_rows(coords_t, part, n)

    best = None
    for d2, i, j in _run_tasks(executor, [lambda p=p: scan(p) for p in parts]):
        if d2 >= 0.0:
            best = merge_max(best, PartialMax(d2, int(i), int(j)))
    return DiameterResult(float(np.sqrt(best.d2)), best.i, best.j)


def _block_spans(n_blocks, n_workers):
    """Contiguous spans of block indices, one per worker (possibly empty)."""
    return [span for span in np.array_split(np.arange(n_blocks), n_workers)]


def assemble_partials(partials, sums, counts=None):
    """Place worker partials into the global per-block arrays by block index.

    Merging is pure placement; no addition happens here, so the later fold
    sees exactly the same per-block values no matter how many workers (or
    devices) produced them.
    """
    for p in partials:
        span = p.sums.shape[0]
        sums[p.first_block : p.first_block + span] = p.sums
        if counts is not None:
            counts[p.first_block : p.first_block + span] = p.counts


def centroid_parallel(dataset, plan, *, block=DEFAULT_BLOCK, executor=None):
    """Global center of gravity via worker-owned block sums.

    Workers own whole accumulation blocks and keep their per-block partials
    private until the barrier; partials are then assembled by block index and
    folded once, so the result is bit-identical for every worker count.
    """
    coords = dataset.coords
    bounds = block_bounds(dataset.n, block)

    def span_task(span):
        local = np.zeros((span.shape[0], dataset.m), dtype=np.float64)
        for t, b in enumerate(span):
            start, stop = bounds[b]
            _kernels.coord_sums_block(coords, start, stop, local[t])
        return PartialSums(int(span[0]) if span.size else 0, local)

    spans = _block_spans(len(bounds), plan.n_workers)
    partials = _run_tasks(executor, [lambda s=s: span_task(s) for s in spans])
    sums = np.zeros((len(bounds), dataset.m), dtype=np.float64)
    assemble_partials(partials, sums)
    return fold_blocks(sums) / dataset.n


def assign_parallel(dataset, model, plan, *, executor=None):
    """Nearest-center labels with each worker writing its own span.

    The per-sample argmin does not depend on who computes it, so labels are
    identical to the single-worker assignment; counts are rebuilt from the
    full label array afterwards.
    """
    labels = np.empty(dataset.n, dtype=np.int64)
    coords = dataset.coords
    centers = model.centers

    def span_task(start, stop):
        _kernels.assign_block(coords, centers, labels, start, stop)

    _run_tasks(
        executor,
        [lambda s=s, e=e: span_task(s, e) for s, e in plan.chunks],
    )
    model.counts[:] = np.bincount(labels, minlength=model.k)
    return Assignment(labels)


def update_parallel(dataset, assignment, k, plan, *, block=DEFAULT_BLOCK, executor=None):
    """Center-of-gravity update with worker-owned block sums.

    Workers compute cluster sums for their own blocks; the assembly, fold,
    division and empty-cluster repair run once on the coordinator, through
    the same code path as the single-worker update.
    """
    labels = check_labels(assignment.labels, n=dataset.n, k=k, name="labels")
    coords = dataset.coords
    bounds = block_bounds(dataset.n, block)
    n_blocks = len(bounds)

    def span_task(span):
        local_sums = np.zeros((span.shape[0], k, dataset.m), dtype=np.float64)
        local_counts = np.zeros((span.shape[0], k), dtype=np.int64)
        triples = [(t, bounds[b][0], bounds[b][1]) for t, b in enumerate(span)]
        cluster_sum_partials(coords, labels, k, triples, local_sums, local_counts)
        return PartialSums(int(span[0]) if span.size else 0, local_sums, local_counts)

    spans = _block_spans(n_blocks, plan.n_workers)
    partials = _run_tasks(executor, [lambda s=s: span_task(s) for s in spans])
    sums = np.zeros((n_blocks, k, dataset.m), dtype=np.float64)
    counts = np.zeros((n_blocks, k), dtype=np.int64)
    assemble_partials(partials, sums, counts)
    return _finish_update(dataset, assignment, k, sums, counts)


def run_multi(dataset, config, n_workers, *, timings=None):
    """Cluster in the multi-worker regime.

    Same phases as the single-worker run with diameter, global centroid,
    assignment and update fanned out over ``n_workers`` concurrent workers
    (initial-center choice stays on the coordinator). Output is bit-identical
    to the single-worker run for any worker count.
    """
    if not isinstance(dataset, Dataset):
        dataset = Dataset(dataset)
    config.validate_for(dataset)
    plan = plan_chunks(dataset.n, n_workers)
    t = timings if timings is not None else PhaseTimings()

    pool = ThreadPoolExecutor(max_workers=plan.n_workers) if plan.n_workers > 1 else None
    try:
        with t.phase("diameter"):
            diam = diameter_parallel(
                dataset,
                plan,
                pair_cap=config.diameter_pair_cap,
                balanced=config.balanced_rows,
                executor=pool,
            )
        with t.phase("init"):
            centroid = centroid_parallel(
                dataset, plan, block=config.accum_block, executor=pool
            )
            model = init_centers(dataset, config, diam, centroid)
        model, assignment, iterations, done, history = iterate(
            dataset,
            config,
            model,
            t.wrap("assign", lambda m: assign_parallel(dataset, m, plan, executor=pool)),
            t.wrap("update", lambda a: update_parallel(
                dataset, a, config.k, plan, block=config.accum_block, executor=pool
            )),
        )
    finally:
        if pool is not None:
            pool.shutdown(wait=True)
    return KmeansResult(model, assignment, iterations, done, diam, centroid, history)
