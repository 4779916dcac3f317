"""Compiled numeric kernels: the single source of truth for float accumulation.

Every execution regime funnels its arithmetic through these functions, which is
what makes cross-regime bit-equality of labels and centers assertable. Three
rules hold throughout and must not be "optimized" away:

* per-pair squared distances accumulate feature 0..m-1 left to right;
* per-block sums accumulate sample-by-sample in ascending index order;
* no fastmath, so LLVM may not reassociate or fuse the chains above.

Kernels are compiled with ``nogil=True`` so worker threads run them truly in
parallel, and ``cache=True`` to amortize compilation across processes.
"""

import numpy as np
from numba import njit

# Rows per j-tile in the pairwise scan; keeps the distance buffer inside L1.
_PAIR_TILE = 1024


@njit(cache=True, nogil=True)
def assign_block(coords, centers, labels, start, stop):
    """Label samples [start, stop) with the index of their nearest center.

    Comparison is on squared distance; an exact tie keeps the lowest center
    index because we only replace on strictly smaller values.
    """
    k = centers.shape[0]
    m = centers.shape[1]
    for i in range(start, stop):
        best = 0
        best_d2 = 0.0
        for f in range(m):
            d = coords[i, f] - centers[0, f]
            best_d2 += d * d
        for c in range(1, k):
            d2 = 0.0
            for f in range(m):
                d = coords[i, f] - centers[c, f]
                d2 += d * d
            if d2 < best_d2:
                best_d2 = d2
                best = c
        labels[i] = best


@njit(cache=True, nogil=True)
def max_pair_rows(coords_t, rows, n):
    """Scan pairs (i, j) with i in ``rows`` (ascending) and j > i over [0, n).

    ``coords_t`` is the (m, n) transposed coordinate matrix so the j loop runs
    over contiguous memory. Returns (best_d2, best_i, best_j) with the strict
    ``>`` update giving the lexicographically smallest maximizing pair; a row
    set producing no pair returns (-1.0, -1, -1).
    """
    m = coords_t.shape[0]
    best_d2 = -1.0
    best_i = -1
    best_j = -1
    buf = np.empty(_PAIR_TILE, dtype=np.float64)
    for r in range(rows.shape[0]):
        i = rows[r]
        j0 = i + 1
        while j0 < n:
            j1 = min(j0 + _PAIR_TILE, n)
            width = j1 - j0
            for t in range(width):
                buf[t] = 0.0
            for f in range(m):
                xf = coords_t[f, i]
                for t in range(width):
                    d = xf - coords_t[f, j0 + t]
                    buf[t] += d * d
            for t in range(width):
                if buf[t] > best_d2:
                    best_d2 = buf[t]
                    best_i = i
                    best_j = j0 + t
            j0 = j1
    return best_d2, best_i, best_j


@njit(cache=True, nogil=True)
def coord_sums_block(coords, start, stop, sums):
    """Add coordinates of samples [start, stop) into ``sums`` (length m).

    Sample order is ascending; same accumulation order as cluster_sums_block
    with every label zero, so the two agree bit-for-bit.
    """
    m = coords.shape[1]
    for i in range(start, stop):
        for f in range(m):
            sums[f] += coords[i, f]


@njit(cache=True, nogil=True)
def cluster_sums_block(coords, labels, start, stop, sums, counts):
    """Accumulate per-cluster coordinate sums and counts over [start, stop).

    ``sums`` is (k, m) and ``counts`` is (k,); both are added into in ascending
    sample order. Returns the first out-of-range label found, or -1.
    """
    k = sums.shape[0]
    m = coords.shape[1]
    for i in range(start, stop):
        c = labels[i]
        if c < 0 or c >= k:
            return i
        counts[c] += 1
        for f in range(m):
            sums[c, f] += coords[i, f]
    return -1


@njit(cache=True, nogil=True)
def self_distances_block(coords, centers, labels, start, stop, out):
    """Squared distance of each sample in [start, stop) to its own center."""
    m = coords.shape[1]
    for i in range(start, stop):
        c = labels[i]
        d2 = 0.0
        for f in range(m):
            d = coords[i, f] - centers[c, f]
            d2 += d * d
        out[i] = d2


@njit(cache=True, nogil=True)
def wcss_block(coords, centers, labels, start, stop):
    """Sum of squared sample-to-own-center distances over [start, stop)."""
    m = coords.shape[1]
    acc = 0.0
    for i in range(start, stop):
        c = labels[i]
        d2 = 0.0
        for f in range(m):
            d = coords[i, f] - centers[c, f]
            d2 += d * d
        acc += d2
    return acc


@njit(cache=True, nogil=True)
def update_min_d2(coords, center, min_d2):
    """Lower per-sample minimum squared distances with a newly chosen center."""
    n = coords.shape[0]
    m = coords.shape[1]
    for i in range(n):
        d2 = 0.0
        for f in range(m):
            d = coords[i, f] - center[f]
            d2 += d * d
        if d2 < min_d2[i]:
            min_d2[i] = d2


@njit(cache=True, nogil=True)
def center_distances(coords, centers, out):
    """Distance from every sample to every center; ``out`` is (n, k)."""
    n = coords.shape[0]
    k = centers.shape[0]
    m = coords.shape[1]
    for i in range(n):
        for c in range(k):
            d2 = 0.0
            for f in range(m):
                d = coords[i, f] - centers[c, f]
                d2 += d * d
            out[i, c] = np.sqrt(d2)


@njit(cache=True, nogil=True)
def squared_distance(a, b):
    """Left-to-right squared Euclidean distance between two 1-D vectors."""
    acc = 0.0
    for f in range(a.shape[0]):
        d = a[f] - b[f]
        acc += d * d
    return acc


def warmup():
    """Force compilation of every kernel (useful before timing runs)."""
    coords = np.zeros((2, 1), dtype=np.float64)
    coords_t = np.ascontiguousarray(coords.T)
    labels = np.zeros(2, dtype=np.int64)
    centers = np.zeros((1, 1), dtype=np.float64)
    assign_block(coords, centers, labels, 0, 2)
    max_pair_rows(coords_t, np.arange(2, dtype=np.int64), 2)
    coord_sums_block(coords, 0, 2, np.zeros(1))
    cluster_sums_block(coords, labels, 0, 2, np.zeros((1, 1)), np.zeros(1, dtype=np.int64))
    self_distances_block(coords, centers, labels, 0, 2, np.zeros(2))
    wcss_block(coords, centers, labels, 0, 2)
    update_min_d2(coords, np.zeros(1), np.zeros(2))
    center_distances(coords, centers, np.zeros((2, 1)))
    squared_distance(coords[0], coords[1])
