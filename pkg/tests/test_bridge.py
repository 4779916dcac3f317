"""Bridge device driving the runner subprocess, against host references.

These tests spawn the real runner (simulation engine) over its stdio
protocol, so they need node and a built runner package; both are skipped
cleanly when the toolchain is absent.
"""

import hashlib
import shutil
import subprocess
import weakref
from pathlib import Path

import numpy as np
import pytest

from conftest import random_coords
from kmeans_regimes.bridge import BridgeDevice
from kmeans_regimes.device import (
    HostReferenceDevice,
    cluster_sum_job,
    coord_sum_job,
    get_device,
    max_pair_job,
    run_gpu,
)
from kmeans_regimes.engine import KmeansConfig, run_single
from kmeans_regimes.exceptions import (
    ContractViolationError,
    DeviceUnavailableError,
    ValidationFailureError,
)
from kmeans_regimes.model import Dataset
from kmeans_regimes.partition import run_multi

NODE = shutil.which("node")
FRONTEND = Path(__file__).resolve().parents[1] / "frontend"
RUNNER_JS = FRONTEND / "dist" / "runner.js"

pytestmark = pytest.mark.skipif(NODE is None, reason="requires node")


@pytest.fixture(scope="session")
def runner_cmd():
    if not RUNNER_JS.exists():
        if shutil.which("tsc") is not None:
            build = ["tsc", "-p", "tsconfig.json"]
        elif shutil.which("npx") is not None:
            build = ["npx", "tsc", "-p", "tsconfig.json"]
        else:
            pytest.skip("runner is not built and no TypeScript compiler is available")
        done = subprocess.run(build, cwd=FRONTEND, capture_output=True, text=True)
        if done.returncode != 0 or not RUNNER_JS.exists():
            pytest.skip(f"runner build failed: {done.stdout.strip()[:300]}")
    return f"{NODE} {RUNNER_JS} --engine sim"


@pytest.fixture
def bridge(runner_cmd):
    dev = get_device("gpu", runner=runner_cmd)
    yield dev
    dev.close()


def _tp(coords):
    return np.ascontiguousarray(coords.T)


class TestHandshake:
    def test_runner_identifies_itself(self, bridge):
        assert bridge.name == "gpu"
        assert bridge.engine == "sim"
        assert bridge.workgroup_size >= 1
        assert bridge.max_buffer_bytes > 0

    def test_missing_binary_is_unavailable(self):
        with pytest.raises(DeviceUnavailableError):
            BridgeDevice("/no/such/runner")

    def test_runner_that_exits_is_unavailable(self):
        with pytest.raises(DeviceUnavailableError):
            BridgeDevice("false")

    def test_bad_runner_flags_are_unavailable(self):
        with pytest.raises(DeviceUnavailableError):
            BridgeDevice(f"{NODE} {RUNNER_JS} --engine quantum")

    def test_env_variable_selects_the_runner(self, monkeypatch, runner_cmd, rng):
        monkeypatch.setenv("CLUSTER_GPU_RUNNER", runner_cmd)
        with get_device("gpu") as dev:
            coords = random_coords(rng, 64, 2)
            res = dev.collect(dev.submit(coord_sum_job(coords, 0, 64)))
            assert res.partial.sums.shape == (1, 2)

    def test_close_shuts_the_runner_down(self, runner_cmd):
        dev = get_device("gpu", runner=runner_cmd)
        proc = dev._proc
        dev.close()
        assert proc.poll() == 0


class TestJobsMatchHostReference:
    def test_coordinate_sums(self, rng, bridge):
        coords = random_coords(rng, 400, 3)
        job = coord_sum_job(coords, 0, 400, block=64)
        host = HostReferenceDevice()
        want = host.collect(host.submit(job)).partial
        got = bridge.collect(bridge.submit(job)).partial
        assert got.first_block == want.first_block == 0
        assert got.sums.shape == want.sums.shape
        np.testing.assert_allclose(got.sums, want.sums, rtol=1e-9, atol=1e-9)

    def test_split_ranges_carry_their_block_offset(self, rng, bridge):
        coords = random_coords(rng, 96, 2)
        lo = bridge.collect(bridge.submit(coord_sum_job(coords, 0, 32, block=32))).partial
        hi = bridge.collect(bridge.submit(coord_sum_job(coords, 32, 96, block=32))).partial
        assert (lo.first_block, hi.first_block) == (0, 1)
        assert lo.sums.shape == (1, 2)
        assert hi.sums.shape == (2, 2)

    def test_zero_length_range(self, rng, bridge):
        coords = random_coords(rng, 32, 2)
        res = bridge.collect(bridge.submit(coord_sum_job(coords, 32, 32, block=16)))
        assert res.partial.sums.shape == (0, 2)

    def test_max_pair(self, rng, bridge):
        coords = random_coords(rng, 150, 4)
        rows = np.arange(149, dtype=np.int64)
        job = max_pair_job(_tp(coords), rows, 150)
        host = HostReferenceDevice()
        want = host.collect(host.submit(job)).pair
        got = bridge.collect(bridge.submit(job)).pair
        assert (got.i, got.j) == (want.i, want.j)
        np.testing.assert_allclose(got.d2, want.d2, rtol=1e-9)

    def test_max_pair_tie_resolution(self, bridge, blob4):
        rows = np.arange(3, dtype=np.int64)
        res = bridge.collect(bridge.submit(max_pair_job(_tp(blob4.coords), rows, 4)))
        assert (res.pair.i, res.pair.j) == (0, 3)
        assert res.pair.d2 == pytest.approx(101.0, rel=1e-12)

    def test_max_pair_empty_rows_gives_no_pair(self, rng, bridge):
        coords = random_coords(rng, 10, 2)
        rows = np.empty(0, dtype=np.int64)
        res = bridge.collect(bridge.submit(max_pair_job(_tp(coords), rows, 10)))
        assert res.pair is None

    def test_cluster_sums_and_counts(self, rng, bridge):
        coords = random_coords(rng, 300, 3)
        labels = rng.integers(4, size=300).astype(np.int64)
        job = cluster_sum_job(coords, labels, 4, 0, 300, block=64)
        host = HostReferenceDevice()
        want = host.collect(host.submit(job)).partial
        got = bridge.collect(bridge.submit(job)).partial
        assert np.array_equal(got.counts, want.counts)
        np.testing.assert_allclose(got.sums, want.sums, rtol=1e-9, atol=1e-9)

    def test_bad_labels_fail_validation(self, rng, bridge):
        coords = random_coords(rng, 40, 2)
        for rogue in (7, -3):
            labels = rng.integers(3, size=40).astype(np.int64)
            labels[17] = rogue
            with pytest.raises(ValidationFailureError):
                bridge.submit(cluster_sum_job(coords, labels, 3, 0, 40))
        # the runner survives rejected jobs
        ok = bridge.collect(
            bridge.submit(cluster_sum_job(coords, rng.integers(3, size=40), 3, 0, 40))
        )
        assert ok.partial.counts.sum() == 40

    def test_contract_breach_is_reported_and_survivable(self, rng, bridge):
        coords = random_coords(rng, 64, 2)
        job = coord_sum_job(coords, 0, 64, block=16)
        job.start = 8  # dodge the host-side constructor check
        with pytest.raises(ContractViolationError):
            bridge.submit(job)
        res = bridge.collect(bridge.submit(coord_sum_job(coords, 0, 64, block=16)))
        assert res.partial.sums.shape == (4, 2)


class TestBufferTransport:
    def test_coordinates_cross_the_wire_once(self, rng, bridge):
        coords = random_coords(rng, 128, 3)
        bridge.collect(bridge.submit(coord_sum_job(coords, 0, 64, block=32)))
        assert len(bridge._buffers) == 1
        res = bridge.collect(bridge.submit(coord_sum_job(coords, 64, 128, block=32)))
        assert len(bridge._buffers) == 1
        assert res.partial.first_block == 2

    def test_unknown_buffer_is_resent(self, rng, bridge):
        coords = random_coords(rng, 64, 2)
        # Mark the buffer as already shipped even though the runner has never
        # seen it; the first execute must come back unknown-coords and the
        # bridge must retry with the payload attached.
        digest = hashlib.sha256(coords.tobytes()).hexdigest()
        bridge._buffers[id(coords)] = (weakref.ref(coords), digest)
        job = coord_sum_job(coords, 0, 64, block=16)
        got = bridge.collect(bridge.submit(job)).partial
        host = HostReferenceDevice()
        want = host.collect(host.submit(job)).partial
        np.testing.assert_allclose(got.sums, want.sums, rtol=1e-9, atol=1e-9)


class TestOffloadedRunOverBridge:
    def test_matches_single_worker_regime(self, rng, bridge):
        for _ in range(3):
            coords = random_coords(rng, int(rng.integers(60, 300)), int(rng.integers(1, 5)))
            k = int(rng.integers(1, 5))
            cfg = KmeansConfig(k=k)
            want = run_single(Dataset(coords), cfg)
            got = run_gpu(Dataset(coords), cfg, 3, bridge)
            assert got.fallback_reason is None
            assert np.array_equal(got.assignment.labels, want.assignment.labels)
            assert got.iterations == want.iterations
            assert (got.diameter.i, got.diameter.j) == (want.diameter.i, want.diameter.j)
            np.testing.assert_allclose(
                got.model.centers, want.model.centers, rtol=1e-9, atol=1e-9
            )
            np.testing.assert_allclose(
                got.global_centroid, want.global_centroid, rtol=1e-9, atol=1e-9
            )
        assert bridge.outstanding() == 0

    def test_runner_death_falls_back_to_multi_worker(self, rng, runner_cmd):
        coords = random_coords(rng, 200, 3)
        cfg = KmeansConfig(k=3)
        dev = get_device("gpu", runner=runner_cmd)
        dev._proc.kill()
        dev._proc.wait()
        got = run_gpu(Dataset(coords), cfg, 2, dev)
        assert got.fallback_reason is not None
        assert "lost" in got.fallback_reason
        want = run_multi(Dataset(coords), cfg, 2)
        assert np.array_equal(got.assignment.labels, want.assignment.labels)
        assert np.array_equal(got.model.centers, want.model.centers)
        dev.close()
