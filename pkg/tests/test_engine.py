"""Seeding phase and the single-worker run."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_coords
from kmeans_regimes.engine import (
    KmeansConfig,
    assign_step,
    converged,
    diameter,
    global_centroid_of,
    init_centers,
    run_single,
    scan_rows,
    update_step,
)
from kmeans_regimes.exceptions import (
    ContractViolationError,
    DegenerateDataError,
    InsufficientDataError,
)
from kmeans_regimes.model import Assignment, ClusterModel, Dataset, wcss
from oracles import (
    oracle_assign,
    oracle_diameter,
    oracle_init_maximin,
    oracle_lloyd,
    oracle_update,
    wcss_py,
)


class TestDiameter:
    def test_unit_square_ties_to_lowest_pair(self):
        ds = Dataset([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        r = diameter(ds)
        assert (r.i, r.j) == (0, 3)
        assert r.d == np.sqrt(2.0)

    def test_collinear(self):
        r = diameter(Dataset([[0.0], [1.0], [5.0]]))
        assert (r.d, r.i, r.j) == (5.0, 0, 2)

    def test_two_points(self):
        r = diameter(Dataset([[0.0, 0.0], [3.0, 4.0]]))
        assert (r.d, r.i, r.j) == (5.0, 0, 1)

    def test_single_sample_raises(self):
        with pytest.raises(InsufficientDataError):
            diameter(Dataset([[1.0, 1.0]]))

    def test_matches_oracle(self, rng):
        for trial in range(50):
            coords = random_coords(rng, int(rng.integers(2, 120)), int(rng.integers(1, 10)))
            d2, i, j = oracle_diameter(coords)
            r = diameter(Dataset(coords))
            assert (r.d, r.i, r.j) == (np.sqrt(d2), i, j)

    @settings(max_examples=30, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_value_invariant_under_permutation(self, pyrandom):
        base = np.array([[0.0, 0.0], [4.0, 1.0], [-3.0, 2.0], [1.0, -5.0], [2.0, 2.0]])
        order = list(range(5))
        pyrandom.shuffle(order)
        assert diameter(Dataset(base[order])).d == diameter(Dataset(base)).d


class TestScanRows:
    def test_exact_when_under_cap(self):
        assert np.array_equal(scan_rows(10), np.arange(9))
        assert np.array_equal(scan_rows(10, pair_cap=45), np.arange(9))

    def test_strided_when_capped(self):
        rows = scan_rows(1000, pair_cap=1000)
        assert len(rows) < 999
        assert rows[0] == 0
        assert np.array_equal(np.diff(rows), np.full(len(rows) - 1, rows[1] - rows[0]))

    def test_degenerate_sizes(self):
        assert len(scan_rows(1)) == 0
        assert len(scan_rows(0)) == 0

    def test_capped_scan_is_lower_bound(self, rng):
        coords = random_coords(rng, 200, 3)
        exact = diameter(Dataset(coords))
        capped = diameter(Dataset(coords), pair_cap=500)
        assert capped.d <= exact.d
        # deterministic: same cap, same answer
        assert capped == diameter(Dataset(coords), pair_cap=500)


class TestInitCenters:
    def test_first_two_centers_are_diameter_pair(self, rng):
        coords = random_coords(rng, 30, 3)
        ds = Dataset(coords)
        diam = diameter(ds)
        model = init_centers(ds, KmeansConfig(k=2), diam)
        assert np.array_equal(model.centers[0], coords[diam.i])
        assert np.array_equal(model.centers[1], coords[diam.j])

    def test_k1_takes_first_diameter_endpoint(self):
        ds = Dataset([[0.0], [9.0], [4.0]])
        model = init_centers(ds, KmeansConfig(k=1), diameter(ds))
        assert np.array_equal(model.centers, [[0.0]])

    def test_matches_farthest_first_oracle(self, rng):
        for trial in range(20):
            coords = random_coords(rng, int(rng.integers(8, 60)), 2)
            ds = Dataset(coords)
            diam = diameter(ds)
            k = int(rng.integers(2, 7))
            model = init_centers(ds, KmeansConfig(k=k), diam)
            d2, i, j = oracle_diameter(coords)
            assert np.array_equal(model.centers, oracle_init_maximin(coords, k, d2, i, j))

    def test_k_equals_n_uses_every_distinct_point(self, rng):
        coords = np.unique(random_coords(rng, 12, 2), axis=0)
        ds = Dataset(coords)
        model = init_centers(ds, KmeansConfig(k=len(coords)), diameter(ds))
        got = {tuple(c) for c in model.centers}
        assert got == {tuple(c) for c in coords}

    def test_fewer_distinct_points_than_k_raises(self):
        ds = Dataset([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(DegenerateDataError):
            init_centers(ds, KmeansConfig(k=3), diameter(ds))

    def test_all_identical_k2_raises(self):
        ds = Dataset([[2.0, 2.0], [2.0, 2.0]])
        with pytest.raises(DegenerateDataError):
            init_centers(ds, KmeansConfig(k=2), diameter(ds))

    def test_random_far_deterministic_per_seed(self, rng):
        coords = random_coords(rng, 200, 3)
        ds = Dataset(coords)
        diam = diameter(ds)
        cfg = KmeansConfig(k=4, init="random-far", seed=11)
        a = init_centers(ds, cfg, diam)
        b = init_centers(ds, cfg, diam)
        assert np.array_equal(a.centers, b.centers)
        c = init_centers(ds, KmeansConfig(k=4, init="random-far", seed=12), diam)
        assert not np.array_equal(a.centers, c.centers)

    def test_random_far_centers_are_separated_samples(self, rng):
        coords = random_coords(rng, 300, 2)
        ds = Dataset(coords)
        diam = diameter(ds)
        k = 5
        model = init_centers(ds, KmeansConfig(k=k, init="random-far", seed=3), diam)
        rows = {tuple(r) for r in coords}
        for c in model.centers:
            assert tuple(c) in rows
        # pairwise distinct
        assert len({tuple(c) for c in model.centers}) == k

    def test_random_far_falls_back_on_tight_data(self):
        # all points nearly coincident: nothing clears the separation bar, so
        # the fallback must still deliver k distinct centers
        coords = np.array([[0.0, 0.0], [1e-9, 0.0], [0.0, 1e-9], [1e-9, 1e-9]])
        ds = Dataset(coords)
        model = init_centers(ds, KmeansConfig(k=3, init="random-far", seed=0), diameter(ds))
        assert len({tuple(c) for c in model.centers}) == 3

    def test_k_larger_than_n_rejected(self):
        ds = Dataset([[0.0], [1.0]])
        with pytest.raises(ContractViolationError):
            init_centers(ds, KmeansConfig(k=3), diameter(ds))


class TestAssignStep:
    def test_nearest_center_wins(self):
        ds = Dataset([[1.0, 0.0], [9.0, 0.0]])
        model = ClusterModel(np.array([[0.0, 0.0], [10.0, 0.0]]))
        labels = assign_step(ds, model)
        assert labels.labels.tolist() == [0, 1]

    def test_tie_goes_to_lower_center(self):
        ds = Dataset([[5.0, 0.0]])
        model = ClusterModel(np.array([[0.0, 0.0], [10.0, 0.0]]))
        assert assign_step(ds, model).labels.tolist() == [0]

    def test_counts_become_label_histogram(self, rng):
        coords = random_coords(rng, 50, 2)
        ds = Dataset(coords)
        model = ClusterModel(coords[:3].copy())
        labels = assign_step(ds, model)
        assert np.array_equal(model.counts, np.bincount(labels.labels, minlength=3))
        assert model.counts.sum() == 50

    def test_matches_oracle(self, rng):
        coords = random_coords(rng, 80, 4)
        ds = Dataset(coords)
        centers = coords[rng.choice(80, size=5, replace=False)].copy()
        got = assign_step(ds, ClusterModel(centers))
        assert np.array_equal(got.labels, oracle_assign(coords, centers))

    def test_dimension_mismatch(self):
        ds = Dataset([[1.0, 2.0]])
        with pytest.raises(ContractViolationError):
            assign_step(ds, ClusterModel(np.zeros((2, 3))))


class TestUpdateStep:
    def test_exact_means(self):
        ds = Dataset([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
        model = update_step(ds, Assignment([0, 0, 1, 1]), 2)
        assert np.array_equal(model.centers, [[0.0, 0.5], [10.0, 0.5]])
        assert model.counts.tolist() == [2, 2]

    def test_matches_oracle(self, rng):
        for trial in range(15):
            coords = random_coords(rng, int(rng.integers(6, 90)), int(rng.integers(1, 6)))
            k = int(rng.integers(1, 5))
            labels = rng.integers(k, size=len(coords)).astype(np.int64)
            want_centers, want_labels, want_counts = oracle_update(coords, labels, k)
            assignment = Assignment(labels.copy())
            model = update_step(Dataset(coords), assignment, k)
            assert np.array_equal(model.centers, want_centers)
            assert np.array_equal(model.counts, want_counts)
            assert np.array_equal(assignment.labels, want_labels)

    def test_empty_cluster_reseeded_at_farthest_sample(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [8.0, 0.0]])
        ds = Dataset(coords)
        assignment = Assignment([0, 0, 0])
        model = update_step(ds, assignment, 2)
        # cluster 1 was empty; the sample farthest from its own center moves in
        assert assignment.labels.tolist() == [0, 0, 1]
        assert model.counts.tolist() == [2, 1]
        assert np.array_equal(model.centers[1], [8.0, 0.0])

    def test_repair_never_raises_objective(self, rng):
        coords = random_coords(rng, 40, 2)
        ds = Dataset(coords)
        k = 6
        labels = np.zeros(40, dtype=np.int64)  # five clusters start empty
        before = wcss_py(coords, np.tile(coords.mean(axis=0), (k, 1)), labels)
        assignment = Assignment(labels)
        model = update_step(ds, assignment, k)
        after = wcss(ds, model, assignment)
        assert model.counts.sum() == 40
        assert (model.counts > 0).all()
        assert after <= before

    def test_out_of_range_labels_rejected(self):
        ds = Dataset([[0.0], [1.0]])
        with pytest.raises(ContractViolationError):
            update_step(ds, Assignment([0, 5]), 2)


class TestConverged:
    def test_identical_models(self):
        a = ClusterModel(np.array([[1.0, 2.0]]))
        assert converged(a, ClusterModel(a.centers.copy()), 0.0)

    def test_tiny_motion_fails_exact_tolerance(self):
        a = ClusterModel(np.array([[1.0, 2.0]]))
        b = ClusterModel(np.array([[1.0, 2.0 + 1e-9]]))
        assert not converged(a, b, 0.0)
        assert converged(a, b, 1e-6)

    def test_worst_center_governs(self):
        a = ClusterModel(np.array([[0.0], [0.0]]))
        b = ClusterModel(np.array([[0.0], [5.0]]))
        assert not converged(a, b, 1.0)
        assert converged(a, b, 5.0)

    def test_shape_mismatch(self):
        with pytest.raises(ContractViolationError):
            converged(ClusterModel(np.zeros((1, 2))), ClusterModel(np.zeros((2, 2))), 0.0)


class TestRunSingle:
    def test_two_blob_instance_reaches_global_optimum(self, blob4):
        res = run_single(blob4, KmeansConfig(k=2))
        assert res.converged
        groups = {tuple(np.flatnonzero(res.assignment.labels == c)) for c in range(2)}
        assert groups == {(0, 1), (2, 3)}
        got = wcss(blob4, res.model, res.assignment)
        # exhaustive check: no 2-labeling of 4 points does better
        best = min(
            wcss_py(blob4.coords, oracle_update(blob4.coords, np.array(lab), 2)[0],
                    oracle_update(blob4.coords, np.array(lab), 2)[1])
            for lab in itertools.product(range(2), repeat=4)
        )
        assert got == best

    def test_k1_center_is_global_centroid(self, rng):
        coords = random_coords(rng, 57, 3)
        ds = Dataset(coords)
        res = run_single(ds, KmeansConfig(k=1))
        assert res.converged
        assert res.iterations <= 2
        assert np.array_equal(res.model.centers[0], global_centroid_of(ds))
        assert np.array_equal(res.model.centers[0], res.global_centroid)

    def test_k_equals_n_gives_zero_objective(self, rng):
        coords = np.unique(random_coords(rng, 10, 2), axis=0)
        ds = Dataset(coords)
        res = run_single(ds, KmeansConfig(k=len(coords)))
        assert res.converged
        assert sorted(res.assignment.labels.tolist()) == list(range(len(coords)))
        assert wcss(ds, res.model, res.assignment) == 0.0

    def test_matches_full_oracle(self, rng):
        for trial in range(10):
            coords = random_coords(rng, int(rng.integers(10, 200)), int(rng.integers(1, 8)))
            k = int(rng.integers(1, 7))
            want = oracle_lloyd(coords, k)
            res = run_single(Dataset(coords), KmeansConfig(k=k))
            assert res.iterations == want["iterations"]
            assert res.converged == want["converged"]
            assert np.array_equal(res.assignment.labels, want["labels"])
            assert np.array_equal(res.model.centers, want["centers"])
            assert np.array_equal(res.model.counts, want["counts"])

    def test_deterministic(self, rng):
        coords = random_coords(rng, 120, 3)
        cfg = KmeansConfig(k=4)
        a = run_single(Dataset(coords), cfg)
        b = run_single(Dataset(coords), cfg)
        assert np.array_equal(a.assignment.labels, b.assignment.labels)
        assert np.array_equal(a.model.centers, b.model.centers)
        assert a.iterations == b.iterations

    def test_converged_result_is_fixed_point(self, rng):
        coords = random_coords(rng, 90, 2)
        ds = Dataset(coords)
        res = run_single(ds, KmeansConfig(k=3))
        assert res.converged
        relabeled = assign_step(ds, res.model.copy())
        assert np.array_equal(relabeled.labels, res.assignment.labels)
        again = update_step(ds, Assignment(res.assignment.labels.copy()), 3)
        assert np.array_equal(again.centers, res.model.centers)

    def test_max_iters_caps_loop(self, rng):
        coords = random_coords(rng, 300, 2, kind=1)
        res = run_single(Dataset(coords), KmeansConfig(k=6, max_iters=1))
        assert res.iterations == 1
        assert not res.converged

    def test_wcss_history_tracks_every_update(self, rng):
        coords = random_coords(rng, 150, 2)
        res = run_single(Dataset(coords), KmeansConfig(k=4, track_wcss=True))
        assert len(res.wcss_history) == res.iterations
        for earlier, later in zip(res.wcss_history, res.wcss_history[1:]):
            assert later <= earlier

    def test_loose_tolerance_stops_earlier(self, rng):
        coords = random_coords(rng, 200, 2, kind=2)
        exact = run_single(Dataset(coords), KmeansConfig(k=4, tol=0.0))
        loose = run_single(Dataset(coords), KmeansConfig(k=4, tol=0.5))
        assert loose.iterations <= exact.iterations
        assert loose.converged

    def test_single_point_dataset_rejected(self):
        with pytest.raises(InsufficientDataError):
            run_single(Dataset([[1.0, 1.0]]), KmeansConfig(k=1))

    def test_accepts_raw_arrays(self):
        res = run_single(np.array([[0.0], [1.0], [10.0]]), KmeansConfig(k=2))
        assert res.converged


class TestConfig:
    def test_rejects_bad_values(self):
        for kwargs in (
            {"k": 0},
            {"k": 2, "max_iters": 0},
            {"k": 2, "tol": -1.0},
            {"k": 2, "init": "kmeans++"},
            {"k": 2, "metric": "manhattan"},
            {"k": 2, "accum_block": 0},
            {"k": 2, "diameter_pair_cap": 0},
        ):
            with pytest.raises(ContractViolationError):
                KmeansConfig(**kwargs)

    def test_tol_nan_rejected(self):
        with pytest.raises(ContractViolationError):
            KmeansConfig(k=2, tol=float("nan"))
