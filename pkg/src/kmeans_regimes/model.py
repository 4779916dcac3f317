"""Core data containers and the metric/centroid primitives shared by every regime.

Centroids and coordinate vectors are plain 1-D float64 arrays throughout; all
distances and accumulations run in 64-bit. The metric seam is a registry that
currently ships Euclidean only.
"""

from typing import NamedTuple

import numpy as np

from . import _kernels
from .exceptions import ContractViolationError, EmptyClusterError
from .validation import check_coordinates, check_labels, check_vector

SUPPORTED_METRICS = ("euclidean",)

# Rows per canonical accumulation block. Every float reduction (coordinate
# sums, cluster sums, WCSS) is accumulated sequentially inside blocks of this
# size and the per-block partials are folded in block order. The block
# structure depends only on n, never on worker count, which is what makes
# results bit-identical across execution regimes. Also the default device job
# granularity.
DEFAULT_BLOCK = 65536


class Point(NamedTuple):
    """One sample: its ordinal in the dataset and a read-only coordinate view."""

    index: int
    coords: np.ndarray


class Dataset:
    """Immutable collection of n samples with m feature coordinates each.

    Coordinates are stored as a C-contiguous float64 array of shape (n, m),
    validated to be finite, and frozen after construction so any number of
    workers can read them concurrently.
    """

    __slots__ = ("coords",)

    def __init__(self, coords, *, copy=True):
        arr = check_coordinates(coords, copy=copy, name="coords")
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    def __setattr__(self, name, value):
        raise AttributeError(f"Dataset is immutable; cannot set {name!r}")

    @property
    def n(self):
        """Sample count."""
        return self.coords.shape[0]

    @property
    def m(self):
        """Feature count."""
        return self.coords.shape[1]

    def point(self, index):
        """Return sample ``index`` as a Point with a read-only coordinate view."""
        i = int(index)
        if not 0 <= i < self.n:
            raise ContractViolationError(
                f"sample index {i} out of range [0, {self.n})"
            )
        return Point(i, self.coords[i])

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Dataset(n={self.n}, m={self.m})"


class ClusterModel:
    """k cluster centers plus per-cluster sample counts.

    ``centers`` is a (k, m) float64 array, ``counts`` a (k,) int64 array.
    Mutated only between parallel phases; safe for concurrent reads.
    """

    __slots__ = ("centers", "counts")

    def __init__(self, centers, counts=None):
        centers = check_coordinates(centers, copy=False, name="centers")
        if counts is None:
            counts = np.zeros(centers.shape[0], dtype=np.int64)
        else:
            counts = np.asarray(counts, dtype=np.int64)
            if counts.shape != (centers.shape[0],):
                raise ContractViolationError(
                    f"counts shape {counts.shape} does not match k={centers.shape[0]}"
                )
            if (counts < 0).any():
                raise ContractViolationError("counts must be non-negative")
        self.centers = centers
        self.counts = counts

    @property
    def k(self):
        return self.centers.shape[0]

    @property
    def m(self):
        return self.centers.shape[1]

    def copy(self):
        return ClusterModel(self.centers.copy(), self.counts.copy())

    def __repr__(self):
        return f"ClusterModel(k={self.k}, m={self.m})"


class Assignment:
    """Per-sample cluster labels defining the partition into k clusters."""

    __slots__ = ("labels",)

    def __init__(self, labels):
        self.labels = np.ascontiguousarray(labels, dtype=np.int64)
        if self.labels.ndim != 1:
            raise ContractViolationError(
                f"labels must be 1-D, got shape {self.labels.shape}"
            )

    @property
    def n(self):
        return self.labels.shape[0]

    def copy(self):
        return Assignment(self.labels.copy())

    def __repr__(self):
        return f"Assignment(n={self.n})"


def distance(a, b):
    """Euclidean distance between two coordinate vectors.

    Symmetric, and zero exactly when the vectors are numerically equal
    coordinate-wise. Raises a contract violation on dimension mismatch.
    """
    a = check_vector(a, name="a")
    b = check_vector(b, dim=a.shape[0], name="b")
    return float(np.sqrt(_kernels.squared_distance(a, b)))


def block_bounds(n, block=DEFAULT_BLOCK):
    """Canonical accumulation-block boundaries for n samples.

    Returns (start, stop) pairs covering [0, n) in order; every block has
    ``block`` rows except a shorter final one. A pure function of (n, block),
    independent of worker count.
    """
    if block < 1:
        raise ContractViolationError(f"block size must be >= 1, got {block}")
    return [(s, min(s + block, n)) for s in range(0, n, block)]


def fold_blocks(partials):
    """Fold per-block partial sums in block index order.

    ``partials`` is an array whose leading axis is the block index; the result
    is the left-to-right elementwise sum over that axis. This is the single
    top-level reduction every regime shares.
    """
    out = np.zeros(partials.shape[1:], dtype=np.float64)
    for b in range(partials.shape[0]):
        out += partials[b]
    return out


def coordinate_sum_partials(coords, bounds):
    """Per-block coordinate sums for the given block boundaries."""
    m = coords.shape[1]
    partials = np.zeros((len(bounds), m), dtype=np.float64)
    for b, (start, stop) in enumerate(bounds):
        _kernels.coord_sums_block(coords, start, stop, partials[b])
    return partials


def centroid_of(points, *, block=DEFAULT_BLOCK):
    """Coordinate-wise mean of a non-empty collection of coordinate vectors.

    Accumulates through the canonical block path so the result is bit-identical
    to what the engine computes for the same rows.
    """
    if points is None:
        raise EmptyClusterError("cannot take the centroid of an empty collection")
    if isinstance(points, Dataset):
        points = points.coords
    elif isinstance(points, (list, tuple)) and points and isinstance(points[0], Point):
        points = [p.coords for p in points]
    arr = np.asarray(points, dtype=np.float64)
    if arr.size == 0:
        raise EmptyClusterError("cannot take the centroid of an empty collection")
    arr = check_coordinates(arr, copy=False, name="points")
    bounds = block_bounds(arr.shape[0], block)
    sums = fold_blocks(coordinate_sum_partials(arr, bounds))
    return sums / arr.shape[0]


def wcss(dataset, model, assignment, *, block=DEFAULT_BLOCK):
    """Within-cluster sum of squared distances of samples to their centers."""
    coords = dataset.coords
    if model.m != dataset.m:
        raise ContractViolationError(
            f"model dimension {model.m} does not match dataset dimension {dataset.m}"
        )
    labels = check_labels(assignment.labels, n=dataset.n, k=model.k, name="labels")
    total = 0.0
    for start, stop in block_bounds(dataset.n, block):
        total += _kernels.wcss_block(coords, model.centers, labels, start, stop)
    return total
