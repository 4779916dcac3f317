"""Scikit-learn style estimator facade over the three execution regimes."""

import os

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from . import _kernels
from .device import get_device, run_gpu
from .engine import KmeansConfig, run_single
from .exceptions import ContractViolationError, DeviceUnavailableError
from .model import DEFAULT_BLOCK, Dataset, wcss
from .partition import run_multi
from .regimes import Regime, select
from .validation import check_coordinates


class RegimeKMeans(ClusterMixin, BaseEstimator):
    """K-means with automatic selection among three execution regimes.

    Small inputs run single-worker, medium ones may fan out over worker
    threads, and large ones may additionally offload the heavy reductions to
    a device. All three produce bit-identical labels and centers on the host
    paths, so the regime is a pure performance choice.

    Parameters
    ----------
    n_clusters : int, default=8
        Number of clusters to form.
    regime : {"auto", "single", "multi", "gpu"}, default="auto"
        Execution regime. "auto" picks the most parallel regime allowed for
        the sample count (and available); an explicit choice outside the
        allowed set raises RegimeNotAllowedError.
    n_workers : int or None, default=None
        Worker threads for the parallel regimes; None means the detected
        hardware parallelism.
    device : {"reference", "gpu"}, default="reference"
        Device used by the offload regime. "reference" executes device jobs
        on the host and is always present.
    init : {"maximin", "random-far"}, default="maximin"
        Seeding strategy for the initial centers.
    max_iter : int, default=1000
        Iteration cap for the assign/update loop.
    tol : float, default=0.0
        Center-movement tolerance for convergence; 0 demands an exact fixed
        point.
    random_state : int, default=0
        Seed for the "random-far" strategy (ignored by "maximin").
    auto_prefer : {"gpu", "multi"}, default="gpu"
        Cap for automatic selection; "multi" keeps auto off the device even
        when one is allowed and present.
    accum_block : int, default=65536
        Accumulation block size shared by all regimes; results are comparable
        across regimes only at equal values.
    diameter_pair_cap : int or None, default=None
        Optional cap on pair evaluations in the seeding diameter scan; when
        set, the diameter becomes a deterministic lower-bound estimate.
    track_wcss : bool, default=False
        Record the objective value after every update step.

    Attributes
    ----------
    cluster_centers_ : ndarray of shape (n_clusters, n_features)
    labels_ : ndarray of shape (n_samples,)
    inertia_ : float
        Within-cluster sum of squared distances.
    n_iter_ : int
    converged_ : bool
    diameter_ : float
        Largest pairwise distance found during seeding.
    diameter_pair_ : tuple of (int, int)
    global_centroid_ : ndarray of shape (n_features,)
    regime_used_ : str
    n_features_in_ : int
    wcss_history_ : list of float or None
    fallback_reason_ : str or None
        Set when a lost device forced the run back to the multi-worker regime.
    """

    def __init__(
        self,
        n_clusters=8,
        *,
        regime="auto",
        n_workers=None,
        device="reference",
        init="maximin",
        max_iter=1000,
        tol=0.0,
        random_state=0,
        auto_prefer="gpu",
        accum_block=DEFAULT_BLOCK,
        diameter_pair_cap=None,
        track_wcss=False,
    ):
        self.n_clusters = n_clusters
        self.regime = regime
        self.n_workers = n_workers
        self.device = device
        self.init = init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.auto_prefer = auto_prefer
        self.accum_block = accum_block
        self.diameter_pair_cap = diameter_pair_cap
        self.track_wcss = track_wcss

    def _config(self):
        return KmeansConfig(
            k=self.n_clusters,
            max_iters=self.max_iter,
            tol=self.tol,
            seed=self.random_state if self.random_state is not None else 0,
            init=self.init,
            accum_block=self.accum_block,
            diameter_pair_cap=self.diameter_pair_cap,
            track_wcss=self.track_wcss,
        )

    def fit(self, X, y=None):
        """Cluster X under the selected execution regime."""
        dataset = X if isinstance(X, Dataset) else Dataset(X)
        config = self._config()
        config.validate_for(dataset)

        requested = None if self.regime == "auto" else Regime(self.regime)
        workers = self.n_workers or os.cpu_count() or 1
        device = None
        if requested is Regime.GPU or (requested is None and self.auto_prefer == "gpu"):
            try:
                device = get_device(self.device)
            except DeviceUnavailableError:
                device = None
        plan = select(
            dataset.n,
            requested,
            workers,
            device is not None,
            auto_prefer=self.auto_prefer,
        )

        if plan.regime is Regime.SINGLE:
            result = run_single(dataset, config)
        elif plan.regime is Regime.MULTI:
            result = run_multi(dataset, config, plan.n_workers)
        else:
            result = run_gpu(dataset, config, plan.n_workers, device)

        self.cluster_centers_ = result.model.centers
        self.labels_ = result.assignment.labels
        self.inertia_ = wcss(dataset, result.model, result.assignment,
                             block=config.accum_block)
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.diameter_ = result.diameter.d
        self.diameter_pair_ = (result.diameter.i, result.diameter.j)
        self.global_centroid_ = result.global_centroid
        self.regime_used_ = plan.regime.value
        self.n_features_in_ = dataset.m
        self.wcss_history_ = result.wcss_history
        self.fallback_reason_ = result.fallback_reason
        return self

    def _check_input(self, X):
        arr = check_coordinates(X, name="X")
        if arr.shape[1] != self.n_features_in_:
            raise ContractViolationError(
                f"X has {arr.shape[1]} features, but this estimator was fitted "
                f"with {self.n_features_in_}"
            )
        return arr

    def predict(self, X):
        """Nearest-center label for each sample (ties toward lower index)."""
        check_is_fitted(self, "cluster_centers_")
        arr = self._check_input(X)
        labels = np.empty(arr.shape[0], dtype=np.int64)
        _kernels.assign_block(arr, self.cluster_centers_, labels, 0, arr.shape[0])
        return labels

    def transform(self, X):
        """Distance from each sample to each cluster center, shape (n, k)."""
        check_is_fitted(self, "cluster_centers_")
        arr = self._check_input(X)
        out = np.empty((arr.shape[0], self.n_clusters), dtype=np.float64)
        _kernels.center_distances(arr, self.cluster_centers_, out)
        return out

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)
