"""K-means clustering with three interchangeable execution regimes.

The same Lloyd iteration runs single-worker, fanned out over worker threads,
or with its heavy reductions offloaded to a device, and the host paths
produce bit-identical labels and centers in all three. Regime choice is
automatic by sample count or explicit per call.
"""

from .datasets import generate_synthetic, load_dataset
from .device import (
    CLUSTER_SUM,
    COORD_SUM,
    MAX_PAIR,
    Device,
    DeviceJob,
    DeviceResult,
    HostReferenceDevice,
    cluster_sum_job,
    coord_sum_job,
    get_device,
    max_pair_job,
    run_gpu,
)
from .engine import (
    DiameterResult,
    KmeansConfig,
    KmeansResult,
    assign_step,
    converged,
    diameter,
    global_centroid_of,
    init_centers,
    run_single,
    update_step,
)
from .estimator import RegimeKMeans
from .exceptions import (
    CapacityExceededError,
    ClusteringError,
    ContractViolationError,
    DataFormatError,
    DegenerateDataError,
    DeviceLostError,
    DeviceUnavailableError,
    DoubleCollectError,
    EmptyClusterError,
    InsufficientDataError,
    NonFiniteValueError,
    OutputMismatchError,
    ParseError,
    RaggedRowsError,
    RegimeNotAllowedError,
    UnknownTicketError,
    ValidationFailureError,
)
from .model import (
    DEFAULT_BLOCK,
    Assignment,
    ClusterModel,
    Dataset,
    Point,
    centroid_of,
    distance,
    wcss,
)
from .partition import (
    ChunkPlan,
    PartialMax,
    PartialSums,
    assign_parallel,
    centroid_parallel,
    diameter_parallel,
    merge_max,
    plan_chunks,
    run_multi,
    update_parallel,
)
from .regimes import (
    GPU_THRESHOLD,
    MULTI_THRESHOLD,
    Regime,
    RegimePlan,
    allowed_regimes,
    select,
)
from .report import PhaseTimings, RunReport

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "CapacityExceededError",
    "ChunkPlan",
    "CLUSTER_SUM",
    "COORD_SUM",
    "ClusterModel",
    "ClusteringError",
    "ContractViolationError",
    "DataFormatError",
    "Dataset",
    "DEFAULT_BLOCK",
    "DegenerateDataError",
    "Device",
    "DeviceJob",
    "DeviceLostError",
    "DeviceResult",
    "DeviceUnavailableError",
    "DiameterResult",
    "DoubleCollectError",
    "EmptyClusterError",
    "GPU_THRESHOLD",
    "HostReferenceDevice",
    "InsufficientDataError",
    "KmeansConfig",
    "KmeansResult",
    "MAX_PAIR",
    "MULTI_THRESHOLD",
    "NonFiniteValueError",
    "OutputMismatchError",
    "ParseError",
    "PartialMax",
    "PartialSums",
    "PhaseTimings",
    "Point",
    "RaggedRowsError",
    "Regime",
    "RegimeKMeans",
    "RegimeNotAllowedError",
    "RegimePlan",
    "RunReport",
    "UnknownTicketError",
    "ValidationFailureError",
    "allowed_regimes",
    "assign_parallel",
    "assign_step",
    "centroid_of",
    "centroid_parallel",
    "cluster_sum_job",
    "converged",
    "coord_sum_job",
    "diameter",
    "diameter_parallel",
    "distance",
    "generate_synthetic",
    "get_device",
    "global_centroid_of",
    "init_centers",
    "load_dataset",
    "max_pair_job",
    "merge_max",
    "plan_chunks",
    "run_gpu",
    "run_multi",
    "run_single",
    "select",
    "update_parallel",
    "update_step",
    "wcss",
]
