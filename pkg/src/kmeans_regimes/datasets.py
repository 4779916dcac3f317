"""Dataset ingestion and synthetic workload generation."""

import csv
import math

import numpy as np

from .exceptions import (
    ContractViolationError,
    DataFormatError,
    NonFiniteValueError,
    ParseError,
    RaggedRowsError,
)
from .model import Dataset
from .validation import check_positive_int


def load_dataset(path, *, header=False, id_column=False):
    """Read comma-separated numeric text into a Dataset.

    ``header`` skips the first row; ``id_column`` drops the first column of
    every data row. Errors carry the 1-based file row (and column where it
    applies) of the offending field.
    """
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, fields in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not fields or (len(fields) == 1 and not fields[0].strip()):
                continue
            if id_column:
                fields = fields[1:]
            if width is None:
                width = len(fields)
                if width == 0:
                    raise RaggedRowsError(
                        f"row {lineno} has no feature columns", row=lineno
                    )
            elif len(fields) != width:
                raise RaggedRowsError(
                    f"row {lineno} has {len(fields)} columns, expected {width}",
                    row=lineno,
                )
            parsed = []
            for col, field in enumerate(fields, start=1):
                try:
                    value = float(field)
                except ValueError:
                    raise ParseError(
                        f"row {lineno}, column {col}: cannot parse {field.strip()!r} "
                        f"as a number",
                        row=lineno,
                        column=col,
                    ) from None
                if not math.isfinite(value):
                    raise NonFiniteValueError(
                        f"row {lineno}, column {col}: non-finite value "
                        f"{field.strip()!r}",
                        row=lineno,
                        column=col,
                    )
                parsed.append(value)
            rows.append(parsed)
    if not rows:
        raise DataFormatError(f"{path} contains no data rows")
    return Dataset(np.asarray(rows, dtype=np.float64), copy=False)


def generate_synthetic(n, m, k_true, seed, spread=1.0):
    """Deterministic isotropic Gaussian blobs.

    ``k_true`` blob centers are drawn uniformly from [-10, 10]^m with the
    seeded generator, samples are split near-equally among blobs, jittered by
    ``spread`` times a standard normal, and shuffled. Identical parameters
    give identical bytes; ``spread=0`` puts every sample exactly on its blob
    center.
    """
    n = check_positive_int(n, name="n")
    m = check_positive_int(m, name="m")
    k_true = check_positive_int(k_true, name="k_true")
    if k_true > n:
        raise ContractViolationError(f"k_true={k_true} exceeds sample count n={n}")
    if not spread >= 0.0:
        raise ContractViolationError(f"spread must be >= 0, got {spread}")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-10.0, 10.0, size=(k_true, m))
    base, extra = divmod(n, k_true)
    parts = []
    for c in range(k_true):
        size = base + (1 if c < extra else 0)
        parts.append(centers[c] + spread * rng.standard_normal((size, m)))
    coords = np.concatenate(parts, axis=0)[rng.permutation(n)]
    return Dataset(coords, copy=False)
