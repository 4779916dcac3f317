"""Execution-regime selection driven by the sample count.

Small problems run single-worker; from MULTI_THRESHOLD samples the
multi-worker regime opens up, and past GPU_THRESHOLD the offload regime does
too. Both thresholds are inclusive in the middle band: n = 10 000 and
n = 100 000 each allow exactly {single, multi}.
"""

from dataclasses import dataclass
from enum import Enum

from .exceptions import DeviceUnavailableError, RegimeNotAllowedError
from .validation import check_positive_int

MULTI_THRESHOLD = 10_000
GPU_THRESHOLD = 100_000


class Regime(str, Enum):
    SINGLE = "single"
    MULTI = "multi"
    GPU = "gpu"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RegimePlan:
    """A committed execution choice: regime, worker count, and the allowed set."""

    regime: Regime
    n_workers: int
    allowed: frozenset


def allowed_regimes(n):
    """The set of regimes permitted for a dataset of n samples."""
    n = check_positive_int(n, name="n")
    if n < MULTI_THRESHOLD:
        return frozenset({Regime.SINGLE})
    if n <= GPU_THRESHOLD:
        return frozenset({Regime.SINGLE, Regime.MULTI})
    return frozenset({Regime.SINGLE, Regime.MULTI, Regime.GPU})


def select(n, requested, hw_workers, device_present, *, auto_prefer="gpu"):
    """Choose the regime to run.

    An explicit request is honored when allowed for this n (and, for the
    offload regime, when a device is present); otherwise the most parallel
    allowed and available regime wins. ``auto_prefer="multi"`` caps automatic
    selection at the multi-worker regime for deployments where offload is not
    worth the transfer overhead.
    """
    hw_workers = check_positive_int(hw_workers, name="hw_workers")
    if auto_prefer not in ("gpu", "multi"):
        raise RegimeNotAllowedError(
            f"auto_prefer must be 'gpu' or 'multi', got {auto_prefer!r}"
        )
    allowed = allowed_regimes(n)

    if requested is not None:
        regime = Regime(requested)
        if regime not in allowed:
            raise RegimeNotAllowedError(
                f"regime {regime} is not allowed for n={n}; "
                f"allowed: {sorted(r.value for r in allowed)}"
            )
        if regime is Regime.GPU and not device_present:
            raise DeviceUnavailableError(
                "offload regime requested but no device is present"
            )
    elif Regime.GPU in allowed and device_present and auto_prefer == "gpu":
        regime = Regime.GPU
    elif Regime.MULTI in allowed:
        regime = Regime.MULTI
    else:
        regime = Regime.SINGLE

    n_workers = 1 if regime is Regime.SINGLE else hw_workers
    return RegimePlan(regime, n_workers, allowed)
