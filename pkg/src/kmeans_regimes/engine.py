"""Single-worker clustering: seeding phase plus the assign/update iteration.

The seeding phase computes the dataset diameter and global centroid, then
derives the k initial centers from the diameter (farthest-first by default, or
a seeded random strategy with a separation threshold). The iteration then
alternates nearest-center assignment and center-of-gravity updates until the
center set stops moving.

Functions here are also the numeric backbone of the parallel regimes: the
block-partial helpers and ``_finish_update`` are shared so every regime folds
the same partials in the same order.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .exceptions import (
    ContractViolationError,
    DegenerateDataError,
    InsufficientDataError,
)
from .model import (
    DEFAULT_BLOCK,
    SUPPORTED_METRICS,
    Assignment,
    ClusterModel,
    Dataset,
    block_bounds,
    coordinate_sum_partials,
    fold_blocks,
    wcss,
)
from .report import PhaseTimings
from .validation import check_labels

INIT_STRATEGIES = ("maximin", "random-far")


@dataclass(frozen=True)
class DiameterResult:
    """Largest pairwise distance in a dataset and the first pair realizing it."""

    d: float
    i: int
    j: int


@dataclass(frozen=True)
class KmeansConfig:
    """Clustering parameters.

    ``init`` selects the seeding strategy: "maximin" (deterministic
    farthest-first traversal started from the diameter pair) or "random-far"
    (seeded random draws kept only when farther than D/(2k) from every chosen
    center, with a farthest-first fallback after 10n rejected draws).

    ``accum_block`` is the accumulation block size shared by all regimes;
    changing it changes last-ulp rounding, so compare runs only at equal
    values. ``diameter_pair_cap`` caps the number of pair evaluations in the
    seeding scan (None = exact scan); when engaged the reported diameter is a
    lower bound. ``track_wcss`` records the objective after every update step.
    """

    k: int
    max_iters: int = 1000
    tol: float = 0.0
    seed: int = 0
    init: str = "maximin"
    metric: str = "euclidean"
    accum_block: int = DEFAULT_BLOCK
    diameter_pair_cap: Optional[int] = None
    balanced_rows: bool = False
    track_wcss: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ContractViolationError(f"k must be >= 1, got {self.k}")
        if self.max_iters < 1:
            raise ContractViolationError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol >= 0.0:
            raise ContractViolationError(f"tol must be >= 0, got {self.tol}")
        if self.init not in INIT_STRATEGIES:
            raise ContractViolationError(
                f"init must be one of {INIT_STRATEGIES}, got {self.init!r}"
            )
        if self.metric not in SUPPORTED_METRICS:
            raise ContractViolationError(
                f"metric must be one of {SUPPORTED_METRICS}, got {self.metric!r}"
            )
        if self.accum_block < 1:
            raise ContractViolationError(
                f"accum_block must be >= 1, got {self.accum_block}"
            )
        if self.diameter_pair_cap is not None and self.diameter_pair_cap < 1:
            raise ContractViolationError(
                f"diameter_pair_cap must be >= 1, got {self.diameter_pair_cap}"
            )

    def validate_for(self, dataset):
        if self.k > dataset.n:
            raise ContractViolationError(
                f"k={self.k} exceeds sample count n={dataset.n}"
            )


@dataclass
class KmeansResult:
    """Everything a clustering run produces."""

    model: ClusterModel
    assignment: Assignment
    iterations: int
    converged: bool
    diameter: DiameterResult
    global_centroid: np.ndarray
    wcss_history: Optional[list] = None
    fallback_reason: Optional[str] = None


def scan_rows(n, pair_cap=None):
    """Row indices the diameter scan visits, as a pure function of (n, cap).

    Row i is scanned against all j > i, so rows [0, n-1) cover every pair.
    With a cap below the full pair count, rows are strided so the visited
    pair count lands near the cap; the scan is then a deterministic
    approximation from below.
    """
    if n < 2:
        return np.empty(0, dtype=np.int64)
    total = n * (n - 1) // 2
    if pair_cap is None or total <= pair_cap:
        return np.arange(n - 1, dtype=np.int64)
    stride = max(2, math.ceil(total / pair_cap))
    return np.arange(0, n - 1, stride, dtype=np.int64)


def diameter(dataset, *, pair_cap=None):
    """Largest pairwise distance over the dataset.

    Exact by default (every pair checked); ties resolve to the smallest
    (i, j). Raises if the dataset has fewer than two samples.
    """
    if dataset.n < 2:
        raise InsufficientDataError(
            f"diameter needs at least 2 samples, got {dataset.n}"
        )
    coords_t = np.ascontiguousarray(dataset.coords.T)
    rows = scan_rows(dataset.n, pair_cap)
    d2, i, j = _kernels.max_pair_rows(coords_t, rows, dataset.n)
    return DiameterResult(float(np.sqrt(d2)), int(i), int(j))


def _append_center(coords, chosen, index, min_d2):
    chosen.append(int(index))
    _kernels.update_min_d2(coords, coords[index], min_d2)


def _farthest_unchosen(min_d2):
    idx = int(np.argmax(min_d2))
    if min_d2[idx] == 0.0:
        raise DegenerateDataError(
            "dataset has fewer distinct points than requested centers"
        )
    return idx


def init_centers(dataset, config, diam, global_centroid=None):
    """Choose the k initial centers.

    maximin: centers 1 and 2 are the diameter pair; each further center is the
    sample maximizing its minimum distance to the chosen ones (ties toward the
    lowest index). random-far: seeded uniform draws, kept when farther than
    D/(2k) from every chosen center, falling back to maximin steps once
    rejections exceed 10n draws. ``global_centroid`` is accepted for interface
    symmetry with the seeding phase; neither strategy consumes it.
    """
    config.validate_for(dataset)
    coords = dataset.coords
    n, k = dataset.n, config.k
    min_d2 = np.full(n, np.inf)
    chosen = []

    if config.init == "maximin":
        _append_center(coords, chosen, diam.i, min_d2)
        if k >= 2:
            if diam.d == 0.0:
                raise DegenerateDataError(
                    "dataset has fewer distinct points than requested centers"
                )
            _append_center(coords, chosen, diam.j, min_d2)
        while len(chosen) < k:
            _append_center(coords, chosen, _farthest_unchosen(min_d2), min_d2)
    else:
        rng = np.random.default_rng(config.seed)
        thr2 = (diam.d / (2.0 * k)) ** 2
        draws = 0
        limit = 10 * n
        while len(chosen) < k:
            accepted = False
            while draws < limit:
                cand = int(rng.integers(n))
                draws += 1
                if not chosen or min_d2[cand] > thr2:
                    _append_center(coords, chosen, cand, min_d2)
                    accepted = True
                    break
            if not accepted:
                _append_center(coords, chosen, _farthest_unchosen(min_d2), min_d2)

    centers = coords[np.asarray(chosen, dtype=np.int64)].copy()
    return ClusterModel(centers, np.zeros(k, dtype=np.int64))


def assign_step(dataset, model):
    """Label every sample with its nearest center (ties toward lower index).

    Updates ``model.counts`` to the label histogram and returns the labels.
    """
    if model.m != dataset.m:
        raise ContractViolationError(
            f"center dimension {model.m} does not match dataset dimension {dataset.m}"
        )
    labels = np.empty(dataset.n, dtype=np.int64)
    _kernels.assign_block(dataset.coords, model.centers, labels, 0, dataset.n)
    model.counts[:] = np.bincount(labels, minlength=model.k)
    return Assignment(labels)


def cluster_sum_partials(coords, labels, k, bounds, sums, counts):
    """Fill per-block cluster sums/counts for the given block boundary slice.

    ``bounds`` is a list of (block_index, start, stop) triples; ``sums`` is the
    full (n_blocks, k, m) array and ``counts`` the (n_blocks, k) array, of
    which only the rows named by the triples are written. Workers call this
    over disjoint block subsets.
    """
    for b, start, stop in bounds:
        bad = _kernels.cluster_sums_block(coords, labels, start, stop, sums[b], counts[b])
        if bad >= 0:
            raise ContractViolationError(
                f"label out of range [0, {k}) at sample {bad}"
            )


def _finish_update(dataset, assignment, k, block_sums, block_counts):
    """Fold block partials into centers, repairing empty clusters.

    Each empty cluster (in ascending index order) is re-seeded at the sample
    farthest from its own new center; that sample is relabeled to the empty
    cluster, which gets the sample's coordinates as its center. The donor
    cluster's center is left as computed.
    """
    coords = dataset.coords
    labels = assignment.labels
    sums = fold_blocks(block_sums)
    counts = block_counts.sum(axis=0).astype(np.int64)
    centers = np.empty((k, dataset.m), dtype=np.float64)
    occupied = counts > 0
    centers[occupied] = sums[occupied] / counts[occupied, None]

    empties = np.flatnonzero(~occupied)
    if empties.size:
        d2 = np.empty(dataset.n, dtype=np.float64)
        _kernels.self_distances_block(coords, centers, labels, 0, dataset.n, d2)
        for c in empties:
            s = int(np.argmax(d2))
            donor = labels[s]
            labels[s] = c
            counts[donor] -= 1
            counts[c] += 1
            centers[c] = coords[s]
            d2[s] = 0.0

    return ClusterModel(centers, counts)


def update_step(dataset, assignment, k, *, block=DEFAULT_BLOCK):
    """Recompute each center as the mean of its samples.

    Empty clusters are repaired (see ``_finish_update``), which can relabel
    one sample per empty cluster in place.
    """
    labels = check_labels(assignment.labels, n=dataset.n, k=k, name="labels")
    bounds = block_bounds(dataset.n, block)
    n_blocks = len(bounds)
    sums = np.zeros((n_blocks, k, dataset.m), dtype=np.float64)
    counts = np.zeros((n_blocks, k), dtype=np.int64)
    triples = [(b, start, stop) for b, (start, stop) in enumerate(bounds)]
    cluster_sum_partials(dataset.coords, labels, k, triples, sums, counts)
    return _finish_update(dataset, assignment, k, sums, counts)


def converged(prev, next_model, tol):
    """True when no center moved farther than ``tol`` (exactly, for tol=0)."""
    if prev.k != next_model.k or prev.m != next_model.m:
        raise ContractViolationError(
            f"cannot compare models of shape ({prev.k}, {prev.m}) "
            f"and ({next_model.k}, {next_model.m})"
        )
    if not tol >= 0.0:
        raise ContractViolationError(f"tol must be >= 0, got {tol}")
    worst = 0.0
    for c in range(prev.k):
        d2 = _kernels.squared_distance(prev.centers[c], next_model.centers[c])
        worst = max(worst, float(np.sqrt(d2)))
    return worst <= tol


def global_centroid_of(dataset, *, block=DEFAULT_BLOCK):
    """Center of gravity of the whole dataset via the canonical block path."""
    bounds = block_bounds(dataset.n, block)
    sums = fold_blocks(coordinate_sum_partials(dataset.coords, bounds))
    return sums / dataset.n


def iterate(dataset, config, model, assign_fn, update_fn):
    """Drive the assign/update loop shared by every regime.

    ``assign_fn(model)`` labels the dataset; ``update_fn(assignment)`` returns
    the next model. Stops when consecutive center sets are within ``tol`` of
    each other or after ``max_iters`` updates. Returns (model, assignment,
    iterations, converged, wcss_history).
    """
    assignment = assign_fn(model)
    history = [] if config.track_wcss else None
    done = False
    iterations = 0
    for _ in range(config.max_iters):
        new_model = update_fn(assignment)
        iterations += 1
        if history is not None:
            history.append(wcss(dataset, new_model, assignment, block=config.accum_block))
        if converged(model, new_model, config.tol):
            model = new_model
            done = True
            break
        model = new_model
        assignment = assign_fn(model)
    return model, assignment, iterations, done, history


def run_single(dataset, config, *, timings=None):
    """Cluster in the single-worker regime.

    Seeding (diameter, global centroid, initial centers) followed by the
    assign/update iteration until centers stop moving (within ``tol``) or
    ``max_iters`` is reached. With tol=0 the result is a pure function of
    (dataset, config). Pass a PhaseTimings to collect per-phase wall times.
    """
    if not isinstance(dataset, Dataset):
        dataset = Dataset(dataset)
    config.validate_for(dataset)
    t = timings if timings is not None else PhaseTimings()
    with t.phase("diameter"):
        diam = diameter(dataset, pair_cap=config.diameter_pair_cap)
    with t.phase("init"):
        centroid = global_centroid_of(dataset, block=config.accum_block)
        model = init_centers(dataset, config, diam, centroid)
    model, assignment, iterations, done, history = iterate(
        dataset,
        config,
        model,
        t.wrap("assign", lambda m: assign_step(dataset, m)),
        t.wrap("update", lambda a: update_step(dataset, a, config.k, block=config.accum_block)),
    )
    return KmeansResult(model, assignment, iterations, done, diam, centroid, history)
