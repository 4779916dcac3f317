"""Regime bands and the selection rules at their exact boundaries."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmeans_regimes.exceptions import (
    ContractViolationError,
    DeviceUnavailableError,
    RegimeNotAllowedError,
)
from kmeans_regimes.regimes import (
    GPU_THRESHOLD,
    MULTI_THRESHOLD,
    Regime,
    allowed_regimes,
    select,
)


class TestAllowedBands:
    def test_small_band(self):
        assert allowed_regimes(10) == {Regime.SINGLE}
        assert allowed_regimes(9_999) == {Regime.SINGLE}

    def test_middle_band_boundaries(self):
        assert allowed_regimes(10_000) == {Regime.SINGLE, Regime.MULTI}
        assert allowed_regimes(50_000) == {Regime.SINGLE, Regime.MULTI}
        assert allowed_regimes(100_000) == {Regime.SINGLE, Regime.MULTI}

    def test_large_band_boundary(self):
        assert allowed_regimes(100_001) == {Regime.SINGLE, Regime.MULTI, Regime.GPU}
        assert allowed_regimes(500_000) == {Regime.SINGLE, Regime.MULTI, Regime.GPU}

    def test_thresholds_are_exact(self):
        assert MULTI_THRESHOLD == 10_000
        assert GPU_THRESHOLD == 100_000
        assert Regime.MULTI not in allowed_regimes(MULTI_THRESHOLD - 1)
        assert Regime.MULTI in allowed_regimes(MULTI_THRESHOLD)
        assert Regime.GPU not in allowed_regimes(GPU_THRESHOLD)
        assert Regime.GPU in allowed_regimes(GPU_THRESHOLD + 1)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 10**7), st.integers(1, 10**7))
    def test_allowed_sets_grow_with_n(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert allowed_regimes(lo) <= allowed_regimes(hi)

    def test_single_always_allowed(self):
        for n in (1, 9_999, 10_000, 100_000, 100_001, 10**7):
            assert Regime.SINGLE in allowed_regimes(n)


class TestSelect:
    def test_explicit_request_honored(self):
        plan = select(50_000, Regime.MULTI, 8, False)
        assert plan.regime is Regime.MULTI
        assert plan.n_workers == 8

    def test_explicit_request_outside_band_rejected(self):
        with pytest.raises(RegimeNotAllowedError):
            select(5_000, Regime.MULTI, 8, False)
        with pytest.raises(RegimeNotAllowedError):
            select(50_000, Regime.GPU, 8, True)

    def test_explicit_gpu_without_device_rejected(self):
        with pytest.raises(DeviceUnavailableError):
            select(200_000, Regime.GPU, 8, False)

    def test_disallowed_outranks_missing_device(self):
        # below the accelerator band the band violation is the error, device or no
        with pytest.raises(RegimeNotAllowedError):
            select(5_000, Regime.GPU, 8, False)

    def test_auto_picks_most_parallel_available(self):
        assert select(5_000, None, 8, True).regime is Regime.SINGLE
        assert select(50_000, None, 8, True).regime is Regime.MULTI
        assert select(200_000, None, 8, True).regime is Regime.GPU
        assert select(200_000, None, 8, False).regime is Regime.MULTI

    def test_auto_prefer_multi_caps_selection(self):
        plan = select(200_000, None, 8, True, auto_prefer="multi")
        assert plan.regime is Regime.MULTI

    def test_single_plan_uses_one_worker(self):
        assert select(100, None, 8, True).n_workers == 1

    def test_worker_count_passes_through(self):
        assert select(50_000, None, 3, False).n_workers == 3

    def test_plan_records_allowed_set(self):
        plan = select(50_000, None, 4, False)
        assert plan.allowed == allowed_regimes(50_000)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ContractViolationError):
            select(0, None, 4, False)
        with pytest.raises(ContractViolationError):
            select(100, None, 0, False)

    @settings(max_examples=100, deadline=None)
    @given(
        st.integers(1, 10**6),
        st.sampled_from([None, Regime.SINGLE, Regime.MULTI, Regime.GPU]),
        st.integers(1, 16),
        st.booleans(),
    )
    def test_selection_always_lands_in_allowed_band(self, n, req, workers, present):
        try:
            plan = select(n, req, workers, present)
        except (RegimeNotAllowedError, DeviceUnavailableError):
            return
        assert plan.regime in allowed_regimes(n)
        if plan.regime is Regime.GPU:
            assert present or req is Regime.GPU
