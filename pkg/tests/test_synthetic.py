"""Planted-partition parameter solving and hierarchical generators."""

import numpy as np
import pytest

from hierspect import (
    Partition,
    SynthSpec,
    generate_hierarchical,
    generate_planted_partition,
    sample_block_model,
    solve_planted_params,
)
from hierspect.errors import InfeasibleSNRError
from hierspect.graph import relative_partition
from hierspect.synthetic import (
    _decode_triangular,
    _distinct_uniform,
    build_hierarchy_model,
    snr_of,
)


class TestSolvePlantedParams:
    def test_worked_example(self):
        alpha, beta = solve_planted_params(3, 50.0, 4.0)
        assert alpha == pytest.approx(50 + 2 * np.sqrt(200))
        assert beta == pytest.approx(50 - np.sqrt(200))
        assert (alpha - beta) ** 2 / (9 * 50) == pytest.approx(4.0)

    def test_snr_zero_er_limit(self):
        alpha, beta = solve_planted_params(5, 12.0, 0.0)
        assert alpha == beta == 12.0

    def test_boundary_beta_zero(self):
        alpha, beta = solve_planted_params(4, 10.0, 10.0)
        assert beta == 0.0
        assert alpha == pytest.approx(40.0)

    def test_infeasible_reports_max(self):
        with pytest.raises(InfeasibleSNRError) as exc:
            solve_planted_params(3, 10.0, 11.0)
        assert exc.value.max_snr == 10.0
        assert "maximum feasible snr is 10" in str(exc.value)

    def test_roundtrip_grid(self):
        # SNR and degree constraints hold exactly across a parameter grid
        for k in (2, 3, 4, 8, 16):
            for c in (2.0, 10.0, 50.0, 300.0):
                for frac in (0.0, 0.1, 0.5, 0.9, 1.0):
                    snr = frac * c
                    alpha, beta = solve_planted_params(k, c, snr)
                    assert snr_of(alpha, beta, k) == pytest.approx(snr, abs=1e-12 * max(1, snr))
                    degree = (alpha + (k - 1) * beta) / k
                    assert degree == pytest.approx(c, rel=1e-12)


class TestSamplingHelpers:
    def test_triangular_decode_exhaustive(self):
        for g in range(2, 45):
            total = g * (g - 1) // 2
            i, j = _decode_triangular(np.arange(total), g)
            pairs = list(zip(i.tolist(), j.tolist()))
            expected = [(a, b) for a in range(g) for b in range(a + 1, g)]
            assert pairs == expected

    def test_triangular_decode_large_spot(self):
        g = 100_000
        total = g * (g - 1) // 2
        idx = np.array([0, 1, g - 2, g - 1, total - 1, total // 2])
        i, j = _decode_triangular(idx, g)
        assert np.all(i < j) and np.all(j < g)
        back = i * (2 * g - i - 1) // 2 + (j - i - 1)
        np.testing.assert_array_equal(back, idx)

    def test_distinct_uniform_properties(self):
        rng = np.random.default_rng(0)
        for total, count in [(10, 10), (10, 3), (10_000, 50), (10_000, 4000)]:
            out = _distinct_uniform(total, count, rng)
            assert out.size == count
            assert np.unique(out).size == count
            assert out.min() >= 0 and out.max() < total

    def test_distinct_uniform_is_uniform(self):
        rng = np.random.default_rng(1)
        counts = np.zeros(30)
        for _ in range(3000):
            counts[_distinct_uniform(30, 3, rng)] += 1
        freq = counts / counts.sum()
        assert np.abs(freq - 1 / 30).max() < 0.01


class TestGeneratePlantedPartition:
    def test_cliques_at_probability_one(self):
        g, p = generate_planted_partition(40, 4, 40.0, 0.0, seed=0)
        adj = g.adjacency.toarray()
        for grp in range(4):
            members = np.flatnonzero(p.assignment == grp)
            block = adj[np.ix_(members, members)]
            assert np.all(block + np.eye(10) == 1.0)
        assert adj.sum() == 4 * 10 * 9

    def test_no_self_loops(self):
        g, _ = generate_planted_partition(200, 3, 30.0, 5.0, seed=1)
        assert np.all(g.adjacency.diagonal() == 0.0)

    def test_probability_out_of_range(self):
        with pytest.raises(ValueError, match="probabilit"):
            generate_planted_partition(10, 2, 20.0, 0.0, seed=2)

    def test_round_robin_sizes(self):
        _, p = generate_planted_partition(11, 3, 5.0, 1.0, seed=3)
        np.testing.assert_array_equal(p.group_sizes, [4, 4, 3])

    def test_mean_degree_concentrates(self):
        # binomial concentration of the empirical mean degree
        n, k, c, snr = 400, 4, 10.0, 4.0
        alpha, beta = solve_planted_params(k, c, snr)
        degrees = []
        for seed in range(100):
            g, _ = generate_planted_partition(n, k, alpha, beta, seed=seed)
            degrees.append(g.degrees.mean())
        mean = np.mean(degrees)
        # variance of the mean degree over runs: 2m edges, each ~Bernoulli
        sd = np.std(degrees) / np.sqrt(len(degrees))
        offset = alpha / n  # no self-pairs: expected degree is c - alpha/n
        assert abs(mean - (c - offset)) <= 3 * max(sd, 1e-3)

    def test_alpha_equals_beta_is_er(self):
        # with equal rates the within- and between-group densities agree
        n, k, c = 300, 3, 12.0
        g, p = generate_planted_partition(n, k, c, c, seed=4)
        adj = g.adjacency.toarray()
        same = p.assignment[:, None] == p.assignment[None, :]
        iu = np.triu_indices(n, k=1)
        within = adj[iu][same[iu]]
        between = adj[iu][~same[iu]]
        prob = c / n
        for sample in (within, between):
            se = np.sqrt(prob * (1 - prob) / sample.size)
            assert abs(sample.mean() - prob) < 4 * se

    def test_determinism(self):
        g1, _ = generate_planted_partition(200, 3, 20.0, 3.0, seed=9)
        g2, _ = generate_planted_partition(200, 3, 20.0, 3.0, seed=9)
        assert (g1.adjacency != g2.adjacency).nnz == 0


class TestSynthSpecValidation:
    def test_unknown_model(self):
        with pytest.raises(ValueError, match="unknown model"):
            SynthSpec(model="banana", n=100, snr=1.0, avg_degree=5.0, schedule=(2,))

    def test_non_increasing_schedule(self):
        with pytest.raises(ValueError, match="increasing"):
            SynthSpec(model="symmetric", n=100, snr=1.0, avg_degree=5.0, schedule=(4, 4))

    def test_non_divisible_schedule(self):
        with pytest.raises(ValueError, match="integer factor"):
            SynthSpec(model="symmetric", n=100, snr=1.0, avg_degree=5.0, schedule=(2, 5))

    def test_asymmetric_schedule_growth(self):
        with pytest.raises(ValueError, match="branch"):
            SynthSpec(model="asymmetric", n=100, snr=1.0, avg_degree=5.0, schedule=(3, 9))


class TestBuildHierarchyModel:
    def test_symmetric_degree_preservation_exact(self):
        spec = SynthSpec(
            model="symmetric", n=3**7, snr=10.0, avg_degree=20.0,
            schedule=(3, 9, 27), seed=0,
        )
        omega, sizes, _ = build_hierarchy_model(spec)
        expected_degrees = omega @ sizes.astype(float)
        np.testing.assert_allclose(expected_degrees, 20.0, rtol=1e-12)

    def test_snr_preserved_per_level(self):
        spec = SynthSpec(
            model="symmetric", n=729, snr=7.0, avg_degree=30.0,
            schedule=(3, 9, 27), seed=0,
        )
        c = 30.0
        for _ in range(3):
            alpha, beta = solve_planted_params(3, c, spec.snr)
            assert snr_of(alpha, beta, 3) == pytest.approx(spec.snr, abs=1e-12)
            c = alpha / 3

    def test_infeasible_snr_names_level(self):
        # the per-level degree sequence decreases toward the SNR from above,
        # so infeasibility can only strike the first refinement
        with pytest.raises(InfeasibleSNRError) as exc:
            spec = SynthSpec(
                model="symmetric", n=729, snr=12.0, avg_degree=10.0,
                schedule=(3, 9, 27), seed=0,
            )
            build_hierarchy_model(spec)
        assert exc.value.level == 1
        assert "level 1" in str(exc.value)

    def test_degree_sequence_approaches_snr_from_above(self):
        spec = SynthSpec(
            model="symmetric", n=3**8, snr=9.0, avg_degree=10.0,
            schedule=(3, 9, 27), seed=0,
        )
        omega, sizes, _ = build_hierarchy_model(spec)  # stays feasible
        assert np.all(omega >= 0.0)

    def test_asymmetric_group_sizes(self):
        spec = SynthSpec(
            model="asymmetric", n=3**7, snr=5.0, avg_degree=30.0,
            schedule=(3, 5, 7), seed=0,
        )
        omega, sizes, leaf_maps = build_hierarchy_model(spec)
        np.testing.assert_array_equal(sizes, [81, 81, 81, 243, 243, 729, 729])
        np.testing.assert_array_equal(leaf_maps[0], [0, 0, 0, 0, 0, 1, 2])
        np.testing.assert_array_equal(leaf_maps[1], [0, 0, 0, 1, 2, 3, 4])

    def test_disassortative_is_column_reversed_assortative(self):
        base = dict(n=2**10, snr=6.0, avg_degree=24.0, schedule=(2, 4, 8), seed=0)
        om_a, _, _ = build_hierarchy_model(SynthSpec(model="assortative", **base))
        om_d, _, _ = build_hierarchy_model(SynthSpec(model="disassortative", **base))
        np.testing.assert_array_equal(om_d, om_a[:, ::-1])
        np.testing.assert_array_equal(om_d, om_d.T)


class TestGenerateHierarchical:
    def test_nested_truth_partitions(self):
        spec = SynthSpec(
            model="symmetric", n=729, snr=8.0, avg_degree=30.0,
            schedule=(3, 9, 27), seed=1,
        )
        _, truth = generate_hierarchical(spec)
        assert [p.k for p in truth.partitions] == [27, 9, 3]
        for fine, coarse in zip(truth.partitions, truth.partitions[1:]):
            rel = relative_partition(fine, coarse)  # raises if not nested
            assert rel.k == coarse.k

    def test_flat_single_level(self):
        spec = SynthSpec(
            model="flat", n=640, snr=10.0, avg_degree=10.0, schedule=(64,), seed=2,
        )
        graph, truth = generate_hierarchical(spec)
        assert len(truth.partitions) == 1
        assert truth.partitions[0].k == 64
        # snr = c means beta = 0: disjoint cliques
        assert graph.degrees.max() == 9.0
        assert graph.degrees.min() == 9.0

    def test_sampled_adjacency_symmetric_no_loops(self):
        spec = SynthSpec(
            model="assortative", n=512, snr=6.0, avg_degree=20.0,
            schedule=(2, 4), seed=3,
        )
        graph, _ = generate_hierarchical(spec)
        adj = graph.adjacency
        assert (adj != adj.T).nnz == 0
        assert np.all(adj.diagonal() == 0.0)

    def test_block_model_determinism_per_block(self):
        omega = np.array([[0.5, 0.1], [0.1, 0.4]])
        sizes = np.array([30, 20])
        g1, _ = sample_block_model(omega, sizes, seed=7)
        g2, _ = sample_block_model(omega, sizes, seed=7)
        assert (g1.adjacency != g2.adjacency).nnz == 0

    def test_disassortative_truth_same_as_assortative(self):
        base = dict(n=2**10, snr=6.0, avg_degree=24.0, schedule=(2, 4, 8))
        _, truth_a = generate_hierarchical(SynthSpec(model="assortative", seed=4, **base))
        _, truth_d = generate_hierarchical(SynthSpec(model="disassortative", seed=4, **base))
        for pa, pd in zip(truth_a.partitions, truth_d.partitions):
            np.testing.assert_array_equal(pa.assignment, pd.assignment)
