import csv

import numpy as np
import pytest

from fcmfed import (
    Activation,
    FcmModel,
    ModelShape,
    Particle,
    PsoConfig,
    classify,
    evaluate_candidate,
    flatten_weights,
    jaccard_complement,
    train,
    unflatten_weights,
    update_position,
    update_velocity,
)
from conftest import make_toy_dataset

SIGMOID_SHAPE = ModelShape(2, 2, Activation.SIGMOID, 5.0)


def jaccard_set_oracle(y_true, y_pred) -> float:
    """Independent set-based reference: 1 - |T∩P| / |T∪P| over positive indices."""
    t = {i for i, v in enumerate(y_true) if v == 1}
    p = {i for i, v in enumerate(y_pred) if v == 1}
    if not t and not p:
        return 0.0
    return 1.0 - len(t & p) / len(t | p)


def perfect_separator_weights() -> np.ndarray:
    """Zero-threshold-free separator for class = f0 > 0.5 under sigmoid.

    Output node 2 keeps its neutral 0.5 (no incoming edges) and acts as the
    reference; node 3 reads f0 minus that reference.
    """
    w = np.zeros((4, 4))
    w[0, 3] = 1.0
    w[2, 3] = -1.0
    return w


class TestJaccardComplement:
    def test_identical_vectors_scores_zero(self):
        assert jaccard_complement([1, 0, 1], [1, 0, 1]) == 0.0

    def test_disjoint_positive_sets_score_one(self):
        assert jaccard_complement([1, 1, 0], [0, 0, 1]) == 1.0

    def test_partial_overlap(self):
        assert jaccard_complement([1, 1, 0, 0], [1, 0, 1, 0]) == pytest.approx(
            2.0 / 3.0, abs=1e-6
        )

    def test_all_negative_match_is_perfect(self):
        assert jaccard_complement([0, 0, 0], [0, 0, 0]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            jaccard_complement([1, 0], [1])

    def test_matches_set_oracle_on_1000_random_pairs(self):
        rng = np.random.default_rng(101)
        for _ in range(1000):
            length = rng.integers(1, 21)
            y = rng.integers(0, 2, length)
            p = rng.integers(0, 2, length)
            assert jaccard_complement(y, p) == jaccard_set_oracle(y, p)


class TestEncoding:
    def test_flatten_unflatten_round_trip(self):
        rng = np.random.default_rng(3)
        w = rng.uniform(-1, 1, (5, 5))
        np.fill_diagonal(w, 0.0)
        assert np.array_equal(unflatten_weights(flatten_weights(w), 5), w)

    def test_dimension_is_offdiagonal_count(self):
        assert flatten_weights(np.zeros((4, 4))).shape == (12,)

    def test_unflatten_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            unflatten_weights(np.zeros(11), 4)


class TestEvaluateCandidate:
    def test_zero_position_predicts_all_class_zero(self, toy_dataset):
        fit = evaluate_candidate(np.zeros(12), SIGMOID_SHAPE, toy_dataset.features, toy_dataset.labels)
        expected = jaccard_complement(toy_dataset.labels, np.zeros(len(toy_dataset), dtype=int))
        assert fit == expected

    def test_perfect_position_scores_zero(self, toy_dataset):
        position = flatten_weights(perfect_separator_weights())
        fit = evaluate_candidate(position, SIGMOID_SHAPE, toy_dataset.features, toy_dataset.labels)
        assert fit == 0.0

    def test_matches_per_row_loop_oracle(self):
        rng = np.random.default_rng(7)
        features = rng.uniform(0, 1, (10, 2))
        labels = rng.integers(0, 2, 10)
        position = rng.uniform(-1, 1, 12)
        fit = evaluate_candidate(position, SIGMOID_SHAPE, features, labels)
        model = FcmModel(2, 2, unflatten_weights(position, 4), Activation.SIGMOID, 5.0)
        row_by_row = [classify(model, row) for row in features]
        assert 0.0 <= fit <= 1.0
        assert fit == jaccard_set_oracle(labels, row_by_row)


class TestVelocityAndPosition:
    def test_consensus_is_stationary(self):
        x = np.array([0.3, -0.2])
        particle = Particle(x.copy(), np.array([0.1, -0.1]), x.copy(), 0.5)
        v = update_velocity(particle, x.copy(), PsoConfig(), np.random.default_rng(0))
        assert np.array_equal(v, particle.velocity)

    def test_degenerate_config_keeps_zero_velocity(self):
        particle = Particle(np.array([0.2]), np.array([0.0]), np.array([0.9]), 0.5)
        config = PsoConfig(phi1=0.0, phi2=0.0)
        v = update_velocity(particle, np.array([-0.9]), config, np.random.default_rng(0))
        assert np.array_equal(v, [0.0])

    def test_seeded_draw_replay(self):
        # same generator, same draw order: u1 for the personal term, then u2
        config = PsoConfig(phi1=2.0, phi2=2.0, velocity_clamp=10.0)
        particle = Particle(np.array([0.2]), np.array([0.0]), np.array([0.6]), 0.1)
        v = update_velocity(particle, np.array([0.8]), config, np.random.default_rng(42))
        replay = np.random.default_rng(42)
        u1 = replay.uniform(0.0, 2.0, 1)
        u2 = replay.uniform(0.0, 2.0, 1)
        assert v[0] == u1[0] * 0.4 + u2[0] * 0.6

    def test_velocity_clamped(self):
        particle = Particle(np.array([-1.0]), np.array([0.0]), np.array([1.0]), 0.0)
        config = PsoConfig(phi1=2.0, phi2=2.0, velocity_clamp=0.5)
        for seed in range(20):
            v = update_velocity(particle, np.array([1.0]), config, np.random.default_rng(seed))
            assert abs(v[0]) <= 0.5

    def test_position_update_inside_bounds(self):
        particle = Particle(np.array([0.2]), np.array([0.1]), np.array([0.2]), 0.0)
        assert update_position(particle)[0] == pytest.approx(0.3)

    def test_position_clamps_at_upper_bound(self):
        particle = Particle(np.array([0.95]), np.array([0.2]), np.array([0.95]), 0.0)
        assert update_position(particle)[0] == 1.0

    def test_position_clamps_at_lower_bound(self):
        particle = Particle(np.array([-0.95]), np.array([-0.2]), np.array([-0.95]), 0.0)
        assert update_position(particle)[0] == -1.0

    def test_bounds_preserved_over_random_updates(self):
        rng = np.random.default_rng(23)
        config = PsoConfig(phi1=2.0, phi2=2.0, velocity_clamp=0.5)
        particle = Particle(
            rng.uniform(-1, 1, 6), rng.uniform(-0.5, 0.5, 6), rng.uniform(-1, 1, 6), 0.5
        )
        for _ in range(500):
            particle.velocity = update_velocity(particle, rng.uniform(-1, 1, 6), config, rng)
            particle.position = update_position(particle)
            assert np.all(np.abs(particle.velocity) <= 0.5)
            assert np.all(np.abs(particle.position) <= 1.0)


class TestConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            PsoConfig(swarm_size=0)
        with pytest.raises(ValueError):
            PsoConfig(iterations=0)
        with pytest.raises(ValueError):
            PsoConfig(phi1=-0.1)
        with pytest.raises(ValueError):
            PsoConfig(velocity_clamp=-1.0)

    def test_defaults(self):
        config = PsoConfig()
        assert (config.swarm_size, config.iterations) == (10, 20)
        assert (config.phi1, config.phi2, config.velocity_clamp) == (2.0, 2.0, 0.5)


class TestTrain:
    def test_warm_start_fitness_is_never_lost(self, toy_dataset):
        result = train(
            toy_dataset.features,
            toy_dataset.labels,
            SIGMOID_SHAPE,
            PsoConfig(seed=5),
            warm_start=perfect_separator_weights(),
        )
        assert result.best_fitness == 0.0

    def test_frozen_swarm_returns_the_initial_particle(self, toy_dataset):
        warm = perfect_separator_weights() * 0.25
        config = PsoConfig(swarm_size=1, iterations=1, phi1=0.0, phi2=0.0, velocity_clamp=0.0, seed=1)
        result = train(toy_dataset.features, toy_dataset.labels, SIGMOID_SHAPE, config, warm_start=warm)
        assert np.array_equal(result.model.weights, warm)

    def test_separable_toy_reaches_high_training_accuracy(self):
        for seed in range(5):
            ds = make_toy_dataset(40, seed=seed)
            result = train(ds.features, ds.labels, SIGMOID_SHAPE, PsoConfig(seed=seed))
            predictions = [classify(result.model, row) for row in ds.features]
            assert np.mean(np.array(predictions) == ds.labels) >= 0.9

    def test_perfect_model_exists_in_search_space(self, toy_dataset):
        # grid over the single feature weight with the reference edge pinned
        best = 1.0
        for w_feature in np.linspace(-1, 1, 41):
            w = np.zeros((4, 4))
            w[0, 3] = w_feature
            w[2, 3] = -1.0
            fit = evaluate_candidate(
                flatten_weights(w), SIGMOID_SHAPE, toy_dataset.features, toy_dataset.labels
            )
            best = min(best, fit)
        assert best == 0.0

    def test_global_best_is_monotone(self):
        rng = np.random.default_rng(31)
        for run in range(50):
            features = rng.uniform(0, 1, (10, 2))
            labels = rng.integers(0, 2, 10)
            config = PsoConfig(swarm_size=4, iterations=5, seed=run)
            result = train(features, labels, SIGMOID_SHAPE, config)
            fits = [f for _, f in result.history]
            assert all(b <= a for a, b in zip(fits, fits[1:]))
            assert all(0.0 <= f <= 1.0 for f in fits)

    def test_seed_determinism_is_byte_identical(self, toy_dataset):
        config = PsoConfig(seed=99)
        a = train(toy_dataset.features, toy_dataset.labels, SIGMOID_SHAPE, config)
        b = train(toy_dataset.features, toy_dataset.labels, SIGMOID_SHAPE, config)
        assert a.model.weights.tobytes() == b.model.weights.tobytes()
        assert a.history == b.history

    def test_different_seeds_differ(self, toy_dataset):
        a = train(toy_dataset.features, toy_dataset.labels, SIGMOID_SHAPE, PsoConfig(seed=1))
        b = train(toy_dataset.features, toy_dataset.labels, SIGMOID_SHAPE, PsoConfig(seed=2))
        assert not np.array_equal(a.model.weights, b.model.weights)

    def test_empty_training_set_is_an_error(self):
        with pytest.raises(ValueError):
            train(np.empty((0, 2)), np.empty(0), SIGMOID_SHAPE, PsoConfig())

    def test_single_class_set_is_flagged(self):
        rng = np.random.default_rng(37)
        features = rng.uniform(0, 1, (8, 2))
        config = PsoConfig(swarm_size=2, iterations=1, seed=0)
        result = train(features, np.zeros(8, dtype=int), SIGMOID_SHAPE, config)
        assert result.single_class
        result = train(features, rng.integers(0, 2, 8), SIGMOID_SHAPE, config)
        assert not result.single_class

    def test_training_log_file(self, tmp_path, toy_dataset):
        path = tmp_path / "trace.csv"
        config = PsoConfig(swarm_size=3, iterations=4, seed=0)
        result = train(toy_dataset.features, toy_dataset.labels, SIGMOID_SHAPE, config, log_path=path)
        with open(path) as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["iteration", "global_best_fitness"]
        assert len(rows) == 1 + len(result.history)
        assert [int(r[0]) for r in rows[1:]] == list(range(5))
        assert [float(r[1]) for r in rows[1:]] == [f for _, f in result.history]

    def test_returned_model_matches_final_history_fitness(self, toy_dataset):
        result = train(toy_dataset.features, toy_dataset.labels, SIGMOID_SHAPE, PsoConfig(seed=3))
        refit = evaluate_candidate(
            flatten_weights(result.model.weights),
            SIGMOID_SHAPE,
            toy_dataset.features,
            toy_dataset.labels,
        )
        assert refit == result.best_fitness == result.history[-1][1]
