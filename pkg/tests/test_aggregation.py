import numpy as np
import pytest

from fcmfed import (
    ContributionBundle,
    DegenerateWeightsWarning,
    WeightScheme,
    aggregate,
    direct_sum,
    federated_loss,
    merge_common_nodes,
    normalize_weights,
    scheme_weights,
)


def random_matrix(rng, n):
    w = rng.uniform(-1, 1, (n, n))
    np.fill_diagonal(w, 0.0)
    return w


def make_bundle(rng, pid, n=4, accuracy=None, precision=None):
    return ContributionBundle(
        participant_id=pid,
        matrix=random_matrix(rng, n),
        accuracy=rng.uniform(0, 1) if accuracy is None else accuracy,
        precision=rng.uniform(0, 1) if precision is None else precision,
        dataset_size=int(rng.integers(2, 100)),
    )


class TestNormalizeWeights:
    def test_equal_inputs_give_equal_shares(self):
        assert np.allclose(normalize_weights([0.9, 0.9, 0.9]), [1 / 3] * 3, atol=1e-12)

    def test_already_normalized_is_identity(self):
        assert np.allclose(normalize_weights([0.8, 0.2]), [0.8, 0.2], atol=1e-12)

    def test_reference_metric_pair(self):
        # 0.9211 / (0.9211 + 0.7742) and its complement, 50-digit oracle
        w = normalize_weights([0.9211, 0.7742])
        assert w[0] == pytest.approx(0.5433256650740282, abs=1e-6)
        assert w[1] == pytest.approx(0.4566743349259718, abs=1e-6)

    def test_sums_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            w = normalize_weights(rng.uniform(0, 5, rng.integers(1, 8)) + 1e-9)
            assert abs(w.sum() - 1.0) <= 1e-12

    def test_all_zero_falls_back_to_constant_with_warning(self):
        with pytest.warns(DegenerateWeightsWarning):
            w = normalize_weights([0.0, 0.0, 0.0, 0.0])
        assert np.array_equal(w, [0.25, 0.25, 0.25, 0.25])

    def test_negative_entries_rejected(self):
        with pytest.raises(ValueError):
            normalize_weights([0.5, -0.1])

    def test_scaling_invariance(self):
        rng = np.random.default_rng(2)
        raw = rng.uniform(0.1, 1.0, 5)
        for factor in (0.5, 3.0, 100.0):
            assert np.allclose(
                normalize_weights(raw), normalize_weights(raw * factor), atol=1e-12
            )


class TestAggregate:
    def test_identical_matrices_are_a_fixed_point(self):
        rng = np.random.default_rng(3)
        m = random_matrix(rng, 4)
        for scheme in WeightScheme:
            bundles = [
                ContributionBundle("a", m, 0.7, 0.6, 10),
                ContributionBundle("b", m, 0.4, 0.9, 20),
            ]
            assert np.allclose(aggregate(bundles, scheme), m, atol=1e-12)

    def test_constant_scheme_is_the_arithmetic_mean(self):
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        b = np.zeros((2, 2))
        bundles = [
            ContributionBundle("a", a, 1.0, 1.0, 1),
            ContributionBundle("b", b, 0.0, 0.0, 1),
        ]
        assert np.array_equal(
            aggregate(bundles, WeightScheme.CONSTANT), [[0.0, 0.5], [0.0, 0.0]]
        )

    def test_degenerate_accuracy_weight_selects_one_matrix(self):
        rng = np.random.default_rng(5)
        a, b = random_matrix(rng, 3), random_matrix(rng, 3)
        bundles = [
            ContributionBundle("a", a, 1.0, 0.5, 1),
            ContributionBundle("b", b, 0.0, 0.5, 1),
        ]
        assert np.array_equal(aggregate(bundles, WeightScheme.ACCURACY), a)

    def test_dimension_mismatch_rejected(self):
        rng = np.random.default_rng(7)
        bundles = [
            ContributionBundle("a", random_matrix(rng, 3), 0.5, 0.5, 1),
            ContributionBundle("b", random_matrix(rng, 4), 0.5, 0.5, 1),
        ]
        with pytest.raises(ValueError):
            aggregate(bundles, WeightScheme.CONSTANT)

    def test_convexity_permutation_and_degeneracy_on_random_bundles(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            n_bundles = int(rng.integers(2, 6))
            bundles = [make_bundle(rng, str(i), n=3) for i in range(n_bundles)]
            scheme = list(WeightScheme)[rng.integers(0, 3)]
            weights = scheme_weights(bundles, scheme)
            raw = sum(w * b.matrix for w, b in zip(weights, bundles))
            stack = np.stack([b.matrix for b in bundles])
            # convex combination stays inside the per-entry envelope ...
            assert np.all(raw >= stack.min(axis=0) - 1e-12)
            assert np.all(raw <= stack.max(axis=0) + 1e-12)
            # ... so the defensive clamp cannot move it
            merged = aggregate(bundles, scheme)
            assert np.allclose(merged, raw, atol=1e-12)
            # permutation equivariance
            perm = rng.permutation(n_bundles)
            permuted = aggregate([bundles[i] for i in perm], scheme)
            assert np.allclose(permuted, merged, atol=1e-12)
            # zero diagonal preserved
            assert np.all(np.diagonal(merged) == 0.0)
        # equal metrics collapse the weighted schemes onto the constant one
        bundles = [make_bundle(rng, str(i), accuracy=0.7, precision=0.4) for i in range(4)]
        constant = aggregate(bundles, WeightScheme.CONSTANT)
        assert np.array_equal(aggregate(bundles, WeightScheme.ACCURACY), constant)
        assert np.array_equal(aggregate(bundles, WeightScheme.PRECISION), constant)


class TestDirectSum:
    def test_two_singletons(self):
        out = direct_sum(np.array([[0.5]]), np.array([[-0.3]]))
        assert np.array_equal(out, [[0.5, 0.0], [0.0, -0.3]])

    def test_empty_left_operand_is_identity(self):
        b = np.array([[0.0, 0.2], [-0.1, 0.0]])
        assert np.array_equal(direct_sum(np.zeros((0, 0)), b), b)
        assert np.array_equal(direct_sum(b, np.zeros((0, 0))), b)

    def test_entry_sum_is_preserved(self):
        rng = np.random.default_rng(13)
        a, b = random_matrix(rng, 2), random_matrix(rng, 3)
        out = direct_sum(a, b)
        assert out.shape == (5, 5)
        assert out.sum() == pytest.approx(a.sum() + b.sum(), abs=1e-12)

    def test_dimensions_and_zero_off_blocks_on_200_random_pairs(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            m, n = int(rng.integers(1, 6)), int(rng.integers(1, 6))
            a, b = random_matrix(rng, m), random_matrix(rng, n)
            out = direct_sum(a, b)
            assert out.shape == (m + n, m + n)
            assert np.array_equal(out[:m, :m], a)
            assert np.array_equal(out[m:, m:], b)
            assert np.all(out[:m, m:] == 0.0)
            assert np.all(out[m:, :m] == 0.0)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            direct_sum(np.zeros((2, 3)), np.zeros((2, 2)))


class TestMergeCommonNodes:
    def test_disjoint_inputs_reduce_to_direct_sum(self):
        rng = np.random.default_rng(19)
        a, b = random_matrix(rng, 2), random_matrix(rng, 3)
        merged, names = merge_common_nodes([(a, ["x", "y"]), (b, ["p", "q", "r"])])
        assert names == ["x", "y", "p", "q", "r"]
        assert np.array_equal(merged, direct_sum(a, b))

    def test_identical_inputs_are_unchanged(self):
        rng = np.random.default_rng(23)
        a = random_matrix(rng, 3)
        merged, names = merge_common_nodes([(a, ["a", "b", "c"]), (a, ["a", "b", "c"])])
        assert names == ["a", "b", "c"]
        assert np.allclose(merged, a, atol=1e-15)

    def test_shared_edge_is_averaged(self):
        small = np.array([[0.0, 0.4], [0.0, 0.0]])
        big = np.zeros((3, 3))
        big[0, 1] = 0.8
        merged, names = merge_common_nodes([(small, ["A", "B"]), (big, ["A", "B", "C"])])
        assert names == ["A", "B", "C"]
        assert merged[0, 1] == pytest.approx(0.6, abs=1e-12)

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            merge_common_nodes([(np.zeros((2, 2)), ["a", "a"])])


class TestFederatedLoss:
    def test_even_weights(self):
        assert federated_loss([0.2, 0.4], [0.5, 0.5]) == pytest.approx(0.3, abs=1e-12)

    def test_one_hot_selects_single_loss(self):
        assert federated_loss([0.7, 0.1, 0.9], [0.0, 1.0, 0.0]) == pytest.approx(0.1)

    def test_dot_product(self):
        assert federated_loss([0.1, 0.2, 0.3], [0.2, 0.3, 0.5]) == pytest.approx(
            0.23, abs=1e-12
        )

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            federated_loss([0.1, 0.2], [1.0])


class TestBundleValidation:
    def test_rejects_out_of_range_matrix(self):
        m = np.zeros((2, 2))
        m[0, 1] = 1.5
        with pytest.raises(ValueError):
            ContributionBundle("a", m, 0.5, 0.5, 1)

    def test_rejects_nonzero_diagonal(self):
        m = np.eye(2) * 0.1
        with pytest.raises(ValueError):
            ContributionBundle("a", m, 0.5, 0.5, 1)

    def test_rejects_out_of_range_metrics(self):
        with pytest.raises(ValueError):
            ContributionBundle("a", np.zeros((2, 2)), 1.5, 0.5, 1)
