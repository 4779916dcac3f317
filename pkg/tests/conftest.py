"""Shared fixtures: kernel warmup and seeded instance generators."""

import numpy as np
import pytest

from kmeans_regimes import _kernels
from kmeans_regimes.model import Dataset


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Pay the one-time compile cost before any timed or counted test runs."""
    _kernels.warmup()


def random_coords(rng, n, m, kind=None):
    """One seeded instance; ``kind`` picks the generator family."""
    kind = kind if kind is not None else rng.integers(3)
    if kind == 0:
        coords = rng.standard_normal((n, m)) * rng.uniform(0.5, 3.0)
    elif kind == 1:
        coords = rng.uniform(-50.0, 50.0, size=(n, m))
    else:
        # clumped: a few gaussian blobs of uneven size
        blobs = int(rng.integers(2, 6))
        centers = rng.uniform(-20.0, 20.0, size=(blobs, m))
        which = rng.integers(blobs, size=n)
        coords = centers[which] + rng.standard_normal((n, m))
    if n > 16 and rng.random() < 0.3:
        # duplicate a few rows; distinct count stays >= n - 4
        dup = rng.integers(1, 5)
        src = rng.integers(n, size=dup)
        dst = rng.integers(n, size=dup)
        coords[dst] = coords[src]
    return np.ascontiguousarray(coords, dtype=np.float64)


def random_instance(rng, n_range=(10, 500), m_range=(1, 25), k_range=(1, 8)):
    """(coords, k) drawn from the given ranges, safe for maximin seeding."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    k = int(rng.integers(k_range[0], min(k_range[1], n) + 1))
    return random_coords(rng, n, m), k


@pytest.fixture
def rng():
    return np.random.default_rng(20260821)


@pytest.fixture
def blob4():
    """Two tight pairs far apart; the canonical 4-point instance."""
    return Dataset(np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]))
