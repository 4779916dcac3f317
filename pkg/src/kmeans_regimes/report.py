"""Phase timing collection and the machine-readable run report.

Timings bracket computation phases with a monotonic clock; file I/O happens
outside the brackets so reported times reflect the regime's work only.
"""

import json
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from typing import Optional


class PhaseTimings:
    """Accumulates wall-clock milliseconds per named phase.

    A phase entered several times (assign/update, once per iteration)
    accumulates; ``ms`` maps phase name to the total.
    """

    def __init__(self):
        self.ms = {}

    @contextmanager
    def phase(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            elapsed = (time.perf_counter() - t0) * 1000.0
            self.ms[name] = self.ms.get(name, 0.0) + elapsed

    def wrap(self, name, fn):
        """Wrap a callable so every invocation accumulates under ``name``."""

        def timed(*args, **kwargs):
            with self.phase(name):
                return fn(*args, **kwargs)

        return timed

    def get(self, name):
        return self.ms.get(name, 0.0)


@dataclass
class RunReport:
    """Everything one clustering run reports, as plain serializable fields."""

    regime: str
    n_workers: int
    n: int
    m: int
    k: int
    iterations: int
    converged: bool
    wcss: float
    diameter: float
    diameter_pair: tuple
    diameter_ms: float
    init_ms: float
    assign_ms: float
    update_ms: float
    total_ms: float
    seed: int
    init: str
    tol: float
    fallback: Optional[str] = None
    wcss_history: Optional[list] = None

    def to_json(self, indent=2):
        return json.dumps(asdict(self), indent=indent)

    @classmethod
    def from_run(cls, result, config, regime, n_workers, dataset, wcss_value,
                 timings, total_ms):
        return cls(
            regime=str(regime),
            n_workers=n_workers,
            n=dataset.n,
            m=dataset.m,
            k=config.k,
            iterations=result.iterations,
            converged=result.converged,
            wcss=wcss_value,
            diameter=result.diameter.d,
            diameter_pair=(result.diameter.i, result.diameter.j),
            diameter_ms=timings.get("diameter"),
            init_ms=timings.get("init"),
            assign_ms=timings.get("assign"),
            update_ms=timings.get("update"),
            total_ms=total_ms,
            seed=config.seed,
            init=config.init,
            tol=config.tol,
            fallback=result.fallback_reason,
            wcss_history=result.wcss_history,
        )
