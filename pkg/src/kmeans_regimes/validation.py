"""Input validation helpers shared by the public API surfaces."""

import numpy as np

from .exceptions import ContractViolationError


def check_coordinates(data, *, copy=False, name="coordinates"):
    """Return ``data`` as a C-contiguous float64 (n, m) array.

    Rejects empty arrays and non-finite values. One-dimensional input is
    treated as n samples with a single feature.
    """
    arr = np.array(data, dtype=np.float64, order="C", copy=True if copy else None)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ContractViolationError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ContractViolationError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ContractViolationError(f"{name} contains NaN or infinite values")
    return np.ascontiguousarray(arr)


def check_vector(vec, *, dim=None, name="vector"):
    """Return ``vec`` as a 1-D float64 array, optionally checking its length."""
    arr = np.asarray(vec, dtype=np.float64).ravel()
    if arr.size < 1:
        raise ContractViolationError(f"{name} must be non-empty")
    if not np.isfinite(arr).all():
        raise ContractViolationError(f"{name} contains NaN or infinite values")
    if dim is not None and arr.size != dim:
        raise ContractViolationError(f"{name} has dimension {arr.size}, expected {dim}")
    return arr


def check_labels(labels, *, n, k, name="labels"):
    """Return ``labels`` as an int64 array of length n with every label in [0, k)."""
    arr = np.asarray(labels, dtype=np.int64).ravel()
    if arr.size != n:
        raise ContractViolationError(f"{name} has length {arr.size}, expected {n}")
    if arr.size and (arr.min() < 0 or arr.max() >= k):
        raise ContractViolationError(f"{name} must lie in [0, {k})")
    return arr


def check_positive_int(value, *, name, minimum=1):
    value = int(value)
    if value < minimum:
        raise ContractViolationError(f"{name} must be >= {minimum}, got {value}")
    return value
