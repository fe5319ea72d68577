"""Projection error, k-means, and their duality."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hierspect import Partition, best_eep_partition, kmeans, projection_error


def brute_force_min_projection_error(vectors, k):
    """Enumerate all partitions of n items into exactly k non-empty groups."""
    n = vectors.shape[0]
    best = np.inf
    best_labels = None
    for labels in itertools.product(range(k), repeat=n):
        if len(set(labels)) != k:
            continue
        err = projection_error(Partition.from_labels(np.array(labels)), vectors)
        if err < best:
            best = err
            best_labels = labels
    return best, best_labels


class TestProjectionError:
    def test_identity_partition_is_zero(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal((8, 3))
        assert projection_error(Partition.identity(8), v) == 0.0

    def test_two_point_single_group(self):
        v = np.array([[1.0 / np.sqrt(2)], [-1.0 / np.sqrt(2)]])
        err = projection_error(Partition.single_group(2), v)
        assert err == pytest.approx(1.0, abs=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="rows"):
            projection_error(Partition.single_group(3), np.zeros((4, 2)))

    def test_orthogonal_right_multiplication_invariance(self):
        rng = np.random.default_rng(1)
        v = rng.standard_normal((12, 4))
        p = Partition.from_labels(np.tile([0, 1, 2], 4))
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        e1 = projection_error(p, v)
        e2 = projection_error(p, v @ q)
        assert e1 == pytest.approx(e2, rel=1e-10)

    def test_group_relabel_invariance(self):
        rng = np.random.default_rng(2)
        v = rng.standard_normal((10, 3))
        labels = np.array([0, 1, 2, 0, 1, 2, 0, 1, 2, 0])
        perm = np.array([2, 0, 1])
        e1 = projection_error(Partition.from_labels(labels), v)
        e2 = projection_error(Partition.from_labels(perm[labels]), v)
        assert e1 == pytest.approx(e2, rel=1e-12)

    def test_monotone_in_columns(self):
        rng = np.random.default_rng(3)
        labels = rng.integers(0, 2, 15)
        labels[:2] = [0, 1]
        v = rng.standard_normal((15, 5))
        p = Partition.from_labels(labels)
        errs = [projection_error(p, v[:, :r]) for r in range(1, 6)]
        assert all(b >= a - 1e-12 for a, b in zip(errs, errs[1:]))

    def test_mean_matches_baseline_for_random_orthonormal(self):
        # random orthonormal blocks with a constant first column average to
        # (n-k)(k-1)/(n-1); moderate sample size here, the tight version
        # runs in the acceptance suite
        rng = np.random.default_rng(4)
        n, k, samples = 60, 4, 3000
        labels = np.arange(n) % k
        p = Partition.from_labels(labels)
        total = 0.0
        const = np.full((n, 1), 1.0 / np.sqrt(n))
        for _ in range(samples):
            raw = rng.standard_normal((n, k - 1))
            raw -= raw.mean(axis=0)
            q, _ = np.linalg.qr(raw)
            total += projection_error(p, np.hstack([const, q]))
        mean = total / samples
        expected = (n - k) * (k - 1) / (n - 1)
        assert mean == pytest.approx(expected, rel=0.05)


class TestKMeans:
    def test_two_well_separated_clusters(self):
        pts = np.array([[0.0], [0.1], [10.0], [10.1]])
        res = kmeans(pts, 2, restarts=5, seed=0)
        np.testing.assert_array_equal(res.partition.assignment, [0, 0, 1, 1])
        assert res.objective == pytest.approx(0.01, abs=1e-12)

    def test_k_equals_m(self):
        pts = np.arange(5.0)[:, None]
        res = kmeans(pts, 5, seed=1)
        assert res.objective == 0.0
        assert res.partition.k == 5

    def test_single_cluster_total_variance(self):
        rng = np.random.default_rng(5)
        pts = rng.standard_normal((20, 3))
        res = kmeans(pts, 1, seed=2)
        expected = np.sum((pts - pts.mean(axis=0)) ** 2)
        assert res.objective == pytest.approx(expected, rel=1e-12)

    def test_k_larger_than_m_rejected(self):
        with pytest.raises(ValueError):
            kmeans(np.zeros((3, 1)), 4)

    def test_duplicated_points_no_empty_clusters(self):
        pts = np.zeros((9, 2))
        res = kmeans(pts, 3, seed=3)
        assert res.partition.k == 3
        assert res.partition.group_sizes.min() >= 1
        assert res.objective == 0.0

    def test_deterministic_for_seed(self):
        rng = np.random.default_rng(6)
        pts = rng.standard_normal((40, 3))
        r1 = kmeans(pts, 4, restarts=7, seed=42)
        r2 = kmeans(pts, 4, restarts=7, seed=42)
        np.testing.assert_array_equal(r1.partition.assignment, r2.partition.assignment)
        assert r1.objective == r2.objective

    def test_labels_canonical_first_occurrence(self):
        rng = np.random.default_rng(7)
        pts = np.vstack([rng.normal(i * 10, 0.1, (5, 2)) for i in range(3)])
        res = kmeans(pts, 3, seed=8)
        assert res.partition.assignment[0] == 0
        firsts = [np.flatnonzero(res.partition.assignment == g)[0] for g in range(3)]
        assert firsts == sorted(firsts)


class TestDuality:
    """The k-means objective equals the projection error of its assignment."""

    def test_duality_on_random_instances(self):
        rng = np.random.default_rng(9)
        for trial in range(200):
            n = int(rng.integers(4, 11))
            k = int(rng.integers(2, 4))
            d = int(rng.integers(1, 4))
            v = rng.standard_normal((n, d))
            res = kmeans(v, k, restarts=4, seed=trial)
            err = projection_error(res.partition, v)
            assert abs(res.objective - err) <= 1e-10

    def test_kmeans_finds_brute_force_optimum_n6(self):
        rng = np.random.default_rng(10)
        v = rng.standard_normal((6, 2))
        best, _ = brute_force_min_projection_error(v, 2)
        res = kmeans(v, 2, restarts=10, seed=11)
        assert res.objective == pytest.approx(best, abs=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10**6))
    def test_kmeans_matches_brute_force_small(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 8))
        v = rng.standard_normal((n, 2))
        best, _ = brute_force_min_projection_error(v, 2)
        res = kmeans(v, 2, restarts=10, seed=seed)
        assert res.objective <= best + 1e-10


class TestBestEEPPartition:
    def test_recovers_exact_piecewise_structure(self):
        labels = np.repeat(np.arange(3), 5)
        truth = Partition.from_labels(labels)
        h = truth.indicator()
        q, _ = np.linalg.qr(h)
        part = best_eep_partition(q, 3, seed=12)
        assert projection_error(part, q) <= 1e-20
        # same grouping up to labels
        assert len(set(zip(part.assignment, labels))) == 3

    def test_k_bounds(self):
        v = np.zeros((5, 2))
        with pytest.raises(ValueError):
            best_eep_partition(v, 1)
        with pytest.raises(ValueError):
            best_eep_partition(v, 5)
