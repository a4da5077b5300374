"""
Tests for the graph encoder, predictor heads, optimizer, checkpoints and scorers.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.config.settings import EncoderConfig, HeadKind, OptimizerConfig
from src.dag.graph import Node, NodeOp, build_graph
from src.exceptions import CheckpointError, ConfigurationError, ModelConfigurationError, TrainingStepError
from src.predictor.checkpoint import MAGIC, load_model, model_from_bytes, model_to_bytes, save_model
from src.predictor.model import (
    LabeledGraph,
    LabeledPair,
    PredictorModel,
    binary_loss_and_grad,
    encode,
    predict_fitness,
    predict_pair,
    regression_loss_and_grad,
)
from src.predictor.optimizer import AdamState, adam_update, sgd_step
from src.predictor.scorers import (
    LearnedScorer,
    NoisyOracle,
    PredictorHandle,
    RegressionScorer,
    noisy_oracle_predict,
)
from src.symreg.operators import random_graph
from src.symreg.tasks import make_task


@pytest.fixture
def graphs(nguyen5):
    rng = np.random.default_rng(7)
    return [random_graph(nguyen5, rng, 8) for _ in range(6)]


@pytest.fixture
def binary_model(tiny_encoder):
    return PredictorModel.initialize(tiny_encoder, np.random.default_rng(1), HeadKind.BINARY)


@pytest.fixture(scope="module")
def shared_binary_model(tiny_encoder):
    return PredictorModel.initialize(tiny_encoder, np.random.default_rng(1), HeadKind.BINARY)


@pytest.fixture
def regression_model(tiny_encoder):
    return PredictorModel.initialize(tiny_encoder, np.random.default_rng(2), HeadKind.REGRESSION)


def _finite_difference(loss_fn, model, coords, eps=1e-6):
    estimates = []
    for i in coords:
        up, down = model.params.copy(), model.params.copy()
        up[i] += eps
        down[i] -= eps
        estimates.append((loss_fn(model.with_params(up)) - loss_fn(model.with_params(down))) / (2 * eps))
    return np.array(estimates)


class TestEncoder:

    def test_relabeling_invariance(self, binary_model):
        a = build_graph([(NodeOp.SIN, (0,)), (NodeOp.COS, (0,)), (NodeOp.ADD, (1, 2))])
        b = build_graph([(NodeOp.COS, (0,)), (NodeOp.SIN, (0,)), (NodeOp.ADD, (2, 1))])
        np.testing.assert_allclose(encode(binary_model, a), encode(binary_model, b), rtol=1e-10, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1), two_inputs=st.booleans())
    def test_random_relabeling_keeps_embedding(self, shared_binary_model, relabel_slots, seed, two_inputs):
        rng = np.random.default_rng(seed)
        g = random_graph(make_task("nguyen12" if two_inputs else "nguyen5"), rng, 10)
        np.testing.assert_allclose(
            encode(shared_binary_model, relabel_slots(g, rng)),
            encode(shared_binary_model, g),
            rtol=1e-9,
            atol=1e-12,
        )

    def test_inactive_slots_ignored(self, binary_model, sin_cos_graph):
        rewired = sin_cos_graph.replace_node(3, Node(NodeOp.MUL, (1, 2)))
        np.testing.assert_array_equal(encode(binary_model, rewired), encode(binary_model, sin_cos_graph))

    def test_embedding_width(self, binary_model, sin_cos_graph, tiny_encoder):
        assert encode(binary_model, sin_cos_graph).shape == (tiny_encoder.graph_dim,)

    def test_param_mismatch(self, tiny_encoder):
        with pytest.raises(ModelConfigurationError):
            PredictorModel(np.zeros(3), tiny_encoder)

    def test_graph_dim_must_match_hidden(self):
        with pytest.raises(ValueError):
            EncoderConfig(node_embed_dim=4, edge_embed_dim=2, hidden_dim=4, num_layers=1, graph_dim=8)


class TestHeads:

    def test_zeroed_params(self, binary_model, regression_model, sin_cos_graph, graphs):
        zeroed = regression_model.with_params(np.zeros(regression_model.num_params))
        assert predict_fitness(zeroed, sin_cos_graph) == 0.0
        zero_binary = binary_model.with_params(np.zeros(binary_model.num_params))
        assert predict_pair(zero_binary, graphs[0], graphs[1]).probability == 0.5
        pair = [LabeledPair(graphs[0], graphs[1], 1.0)]
        loss, _ = binary_loss_and_grad(zero_binary, pair)
        assert loss == pytest.approx(math.log(2.0))

    def test_head_kind_enforced(self, binary_model, sin_cos_graph):
        with pytest.raises(ConfigurationError):
            predict_fitness(binary_model, sin_cos_graph)

    def test_empty_batch(self, binary_model):
        with pytest.raises(ConfigurationError):
            binary_loss_and_grad(binary_model, [])

    def test_binary_gradient_matches_finite_difference(self, binary_model, graphs):
        pairs = [
            LabeledPair(graphs[0], graphs[1], 1.0),
            LabeledPair(graphs[2], graphs[3], 0.0),
            LabeledPair(graphs[4], graphs[0], 1.0),
        ]
        _, grad = binary_loss_and_grad(binary_model, pairs)
        coords = np.random.default_rng(0).choice(binary_model.num_params, size=25, replace=False)
        numeric = _finite_difference(lambda m: binary_loss_and_grad(m, pairs)[0], binary_model, coords)
        np.testing.assert_allclose(grad[coords], numeric, rtol=1e-4, atol=1e-7)

    def test_regression_gradient_matches_finite_difference(self, regression_model, graphs):
        examples = [LabeledGraph(g, f) for g, f in zip(graphs, [0.1, 0.4, 0.9, 0.2, 0.6, 0.3])]
        _, grad = regression_loss_and_grad(regression_model, examples)
        coords = np.random.default_rng(1).choice(regression_model.num_params, size=25, replace=False)
        numeric = _finite_difference(lambda m: regression_loss_and_grad(m, examples)[0], regression_model, coords)
        np.testing.assert_allclose(grad[coords], numeric, rtol=1e-4, atol=1e-7)

    def test_repeated_graphs_share_gradient(self, binary_model, graphs):
        pair = LabeledPair(graphs[0], graphs[1], 1.0)
        loss_one, grad_one = binary_loss_and_grad(binary_model, [pair])
        loss_two, grad_two = binary_loss_and_grad(binary_model, [pair, pair])
        assert loss_one == pytest.approx(loss_two)
        np.testing.assert_allclose(grad_one, grad_two)

    def test_non_finite_target_rejected(self, regression_model, graphs):
        with pytest.raises(TrainingStepError):
            regression_loss_and_grad(regression_model, [LabeledGraph(graphs[0], float("nan"))])


class TestOptimizer:

    def test_first_step_by_hand(self):
        config = OptimizerConfig(learning_rate=1e-4, weight_decay=0.0)
        params, state = adam_update(np.zeros(3), np.ones(3), AdamState.zeros(3), config)
        np.testing.assert_allclose(params, -1e-4, rtol=1e-6)
        assert state.step == 1

    def test_weight_decay_shrinks(self):
        config = OptimizerConfig(learning_rate=0.1, weight_decay=0.5)
        params, _ = adam_update(np.ones(2), np.zeros(2), AdamState.zeros(2), config)
        np.testing.assert_allclose(params, 0.95)

    def test_sgd_step_returns_new_model(self, binary_model):
        state = AdamState.zeros(binary_model.num_params)
        before = binary_model.params.copy()
        updated, state = sgd_step(binary_model, np.ones(binary_model.num_params), state, OptimizerConfig())
        np.testing.assert_array_equal(binary_model.params, before)
        assert np.all(updated.params < before)


class TestCheckpoint:

    def test_bytes_identity(self, binary_model, regression_model):
        for model in (binary_model, regression_model):
            restored = model_from_bytes(model_to_bytes(model))
            assert restored.head_kind is model.head_kind
            assert restored.config == model.config
            np.testing.assert_array_equal(restored.params, model.params)

    def test_file_round_trip(self, binary_model, tmp_path):
        path = save_model(binary_model, tmp_path / "nested" / "model.bin")
        np.testing.assert_array_equal(load_model(path).params, binary_model.params)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError, match="not found"):
            load_model(tmp_path / "absent.bin")

    def test_bad_magic(self, binary_model):
        data = model_to_bytes(binary_model)
        with pytest.raises(CheckpointError, match="not a predictor"):
            model_from_bytes(b"XXXX" + data[len(MAGIC):])

    def test_truncated(self, binary_model):
        data = model_to_bytes(binary_model)
        with pytest.raises(CheckpointError):
            model_from_bytes(data[:10])
        with pytest.raises(CheckpointError, match="payload"):
            model_from_bytes(data[:-8])

    def test_unknown_version(self, binary_model):
        data = bytearray(model_to_bytes(binary_model))
        data[4] = 9
        with pytest.raises(CheckpointError, match="version"):
            model_from_bytes(bytes(data))


class TestScorers:

    def test_handle_requires_publish(self):
        handle = PredictorHandle()
        with pytest.raises(ConfigurationError):
            handle.snapshot()

    def test_handle_version(self, binary_model):
        handle = PredictorHandle(binary_model)
        handle.publish(binary_model)
        assert handle.version == 2

    def test_learned_scorer_matrix_matches_pairs(self, binary_model, graphs):
        scorer = LearnedScorer(PredictorHandle(binary_model))
        matrix = scorer.pairwise_logits(graphs[:4])
        for i in range(4):
            assert matrix[i, i] == 0.0
            for j in range(4):
                if i != j:
                    assert matrix[i, j] == pytest.approx(scorer.score(graphs[i], graphs[j]).logit)

    def test_regression_scorer(self, regression_model, graphs):
        scorer = RegressionScorer(PredictorHandle(regression_model))
        score = scorer.score(graphs[0], graphs[1])
        assert score.probability in (0.0, 1.0)
        assert (score.logit > 0) == (score.probability == 1.0)
        with pytest.raises(ConfigurationError):
            RegressionScorer(PredictorHandle(PredictorModel.initialize(
                regression_model.config, np.random.default_rng(0), HeadKind.BINARY
            ))).score(graphs[0], graphs[1])

    def test_perfect_oracle_always_right(self, graphs):
        truth = {g: float(i) for i, g in enumerate(graphs)}.__getitem__
        oracle = NoisyOracle(truth, 1.0, np.random.default_rng(0))
        assert oracle.score(graphs[3], graphs[1]).probability == 1.0
        assert oracle.score(graphs[1], graphs[3]).logit == -math.inf

    def test_noisy_oracle_frequency(self, graphs):
        truth = {graphs[0]: 0.9, graphs[1]: 0.1}.__getitem__
        rng = np.random.default_rng(3)
        n, a = 20_000, 0.8
        correct = sum(noisy_oracle_predict(truth, a, graphs[0], graphs[1], rng).probability == 1.0 for _ in range(n))
        sigma = math.sqrt(a * (1 - a) / n)
        assert abs(correct / n - a) < 3 * sigma

    def test_perfect_oracle_rejects_ties(self, graphs):
        truth = lambda g: 0.5
        rng = np.random.default_rng(4)
        assert all(
            noisy_oracle_predict(truth, 1.0, graphs[0], graphs[1], rng).probability == 0.0 for _ in range(1000)
        )
        matrix = NoisyOracle(truth, 1.0, rng).pairwise_logits(graphs)
        assert np.all(matrix[~np.eye(len(graphs), dtype=bool)] == -math.inf)

    def test_noisy_oracle_flips_ties_at_error_rate(self, graphs):
        truth = lambda g: 0.5
        rng = np.random.default_rng(4)
        n, a = 20_000, 0.7
        wins = sum(noisy_oracle_predict(truth, a, graphs[0], graphs[1], rng).probability == 1.0 for _ in range(n))
        assert abs(wins / n - (1 - a)) < 3 * math.sqrt(a * (1 - a) / n)

    def test_oracle_matrix_frequency(self, graphs):
        truth = {g: float(i) for i, g in enumerate(graphs)}.__getitem__
        oracle = NoisyOracle(truth, 0.7, np.random.default_rng(5))
        agree, total = 0, 0
        for _ in range(300):
            logits = oracle.pairwise_logits(graphs)
            for i in range(len(graphs)):
                for j in range(len(graphs)):
                    if i != j:
                        agree += (logits[i, j] > 0) == (i > j)
                        total += 1
        assert abs(agree / total - 0.7) < 3 * math.sqrt(0.21 / total)

    def test_oracle_accuracy_range(self, graphs):
        with pytest.raises(ConfigurationError):
            NoisyOracle(lambda g: 0.0, 0.4, np.random.default_rng(0))
