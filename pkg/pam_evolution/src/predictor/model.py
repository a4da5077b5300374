"""
Pairwise binary predictor and its regression counterpart.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..config.settings import EncoderConfig, HeadKind
from ..dag.graph import NUM_OP_KINDS, ProgramGraph
from ..exceptions import ConfigurationError, TrainingStepError
from .encoder import GraphBatch, encode_backward, encode_batch
from .layout import ParamLayout


@dataclass(frozen=True)
class BinaryScore:
    """Logit and probability that the first graph beats the second."""
    logit: float
    probability: float

    @classmethod
    def from_logit(cls, logit: float) -> "BinaryScore":
        return cls(logit=float(logit), probability=sigmoid(logit))

    @property
    def prefers_first(self) -> bool:
        return self.probability > 0.5


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


@dataclass(frozen=True)
class LabeledPair:
    """Training pair; label 1 means ``first`` has the higher fitness."""
    first: ProgramGraph
    second: ProgramGraph
    label: float


@dataclass(frozen=True)
class LabeledGraph:
    """Regression training example."""
    graph: ProgramGraph
    fitness: float


@dataclass(frozen=True, eq=False)
class PredictorModel:
    """
    Graph encoder plus output head over one flat parameter vector.

    Instances are treated as immutable snapshots: forward passes never write
    to ``params`` and training produces a new model.
    """
    params: np.ndarray
    config: EncoderConfig
    head_kind: HeadKind = HeadKind.BINARY
    num_op_kinds: int = NUM_OP_KINDS
    layout: ParamLayout = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        layout = ParamLayout(self.config, self.num_op_kinds, self.head_kind)
        layout.unpack(self.params)
        object.__setattr__(self, "layout", layout)

    @classmethod
    def initialize(
        cls,
        config: EncoderConfig,
        rng: np.random.Generator,
        head_kind: HeadKind = HeadKind.BINARY,
        num_op_kinds: int = NUM_OP_KINDS,
    ) -> "PredictorModel":
        layout = ParamLayout(config, num_op_kinds, head_kind)
        return cls(layout.initialize(rng), config, head_kind, num_op_kinds)

    @property
    def num_params(self) -> int:
        return self.layout.size

    def with_params(self, params: np.ndarray) -> "PredictorModel":
        return PredictorModel(params, self.config, self.head_kind, self.num_op_kinds)

    def weights(self) -> Dict[str, np.ndarray]:
        return self.layout.unpack(self.params)


def _require_head(model: PredictorModel, kind: HeadKind) -> None:
    if model.head_kind is not kind:
        raise ConfigurationError(
            f"operation needs a {kind.value} head, model has {model.head_kind.value}"
        )


def encode_graphs(model: PredictorModel, graphs: Sequence[ProgramGraph]) -> np.ndarray:
    """Embeddings of several graphs, shape (len(graphs), graph_dim)."""
    embeddings, _ = encode_batch(model.layout, model.weights(), GraphBatch.from_graphs(graphs))
    return embeddings


def encode(model: PredictorModel, g: ProgramGraph) -> np.ndarray:
    """Graph embedding, sum of final active-node states."""
    return encode_graphs(model, [g])[0]


def _head_forward(w: Dict[str, np.ndarray], z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    pre = z @ w["head.hidden.weight"] + w["head.hidden.bias"]
    hidden = np.maximum(pre, 0.0)
    out = hidden @ w["head.out.weight"] + w["head.out.bias"][0]
    return out, pre, hidden


def _head_backward(
    w: Dict[str, np.ndarray],
    g: Dict[str, np.ndarray],
    z: np.ndarray,
    pre: np.ndarray,
    hidden: np.ndarray,
    d_out: np.ndarray,
) -> np.ndarray:
    g["head.out.weight"] += hidden.T @ d_out
    g["head.out.bias"][0] += d_out.sum()
    d_pre = np.outer(d_out, w["head.out.weight"]) * (pre > 0)
    g["head.hidden.weight"] += z.T @ d_pre
    g["head.hidden.bias"] += d_pre.sum(axis=0)
    return d_pre @ w["head.hidden.weight"].T


def pair_logits(
    model: PredictorModel, embeddings: np.ndarray, first: np.ndarray, second: np.ndarray
) -> np.ndarray:
    """Head logits for index pairs into precomputed embeddings."""
    _require_head(model, HeadKind.BINARY)
    z = np.concatenate([embeddings[first], embeddings[second]], axis=1)
    logits, _, _ = _head_forward(model.weights(), z)
    return logits


def predict_pair(model: PredictorModel, x1: ProgramGraph, x2: ProgramGraph) -> BinaryScore:
    """Score that ``x1`` is better than ``x2``."""
    _require_head(model, HeadKind.BINARY)
    embeddings = encode_graphs(model, [x1, x2])
    logit = pair_logits(model, embeddings, np.array([0]), np.array([1]))[0]
    return BinaryScore.from_logit(float(logit))


def predict_fitness(model: PredictorModel, g: ProgramGraph) -> float:
    """Regression-head fitness estimate."""
    return float(predict_fitnesses(model, [g])[0])


def predict_fitnesses(model: PredictorModel, graphs: Sequence[ProgramGraph]) -> np.ndarray:
    _require_head(model, HeadKind.REGRESSION)
    embeddings = encode_graphs(model, graphs)
    out, _, _ = _head_forward(model.weights(), embeddings)
    return out


def _unique_graphs(graphs: Sequence[ProgramGraph]) -> Tuple[List[ProgramGraph], np.ndarray]:
    index: Dict[ProgramGraph, int] = {}
    order: List[ProgramGraph] = []
    positions = np.empty(len(graphs), dtype=np.int64)
    for i, g in enumerate(graphs):
        if g not in index:
            index[g] = len(order)
            order.append(g)
        positions[i] = index[g]
    return order, positions


def _check_finite(loss: float, grad: np.ndarray) -> None:
    if not math.isfinite(loss) or not np.all(np.isfinite(grad)):
        raise TrainingStepError("non-finite loss or gradient", {"loss": loss})


def binary_loss_and_grad(
    model: PredictorModel, pairs: Sequence[LabeledPair]
) -> Tuple[float, np.ndarray]:
    """Mean binary cross entropy on logits and its exact gradient."""
    _require_head(model, HeadKind.BINARY)
    if not pairs:
        raise ConfigurationError("loss needs a nonempty batch")
    w = model.weights()
    grad = np.zeros_like(model.params)
    g = model.layout.unpack(grad)

    unique, positions = _unique_graphs([p.first for p in pairs] + [p.second for p in pairs])
    embeddings, cache = encode_batch(model.layout, w, GraphBatch.from_graphs(unique))
    n = len(pairs)
    first, second = positions[:n], positions[n:]
    labels = np.array([p.label for p in pairs], dtype=np.float64)

    z = np.concatenate([embeddings[first], embeddings[second]], axis=1)
    logits, pre, hidden = _head_forward(w, z)
    loss = float(np.mean(np.logaddexp(0.0, logits) - labels * logits))

    probabilities = np.exp(-np.logaddexp(0.0, -logits))
    d_logits = (probabilities - labels) / n
    d_z = _head_backward(w, g, z, pre, hidden, d_logits)
    d_embeddings = np.zeros_like(embeddings)
    dim = embeddings.shape[1]
    np.add.at(d_embeddings, first, d_z[:, :dim])
    np.add.at(d_embeddings, second, d_z[:, dim:])
    encode_backward(model.layout, w, g, cache, d_embeddings)

    _check_finite(loss, grad)
    return loss, grad


def regression_loss_and_grad(
    model: PredictorModel, examples: Sequence[LabeledGraph]
) -> Tuple[float, np.ndarray]:
    """Mean squared error against stored fitness and its exact gradient."""
    _require_head(model, HeadKind.REGRESSION)
    if not examples:
        raise ConfigurationError("loss needs a nonempty batch")
    w = model.weights()
    grad = np.zeros_like(model.params)
    g = model.layout.unpack(grad)

    unique, positions = _unique_graphs([e.graph for e in examples])
    embeddings, cache = encode_batch(model.layout, w, GraphBatch.from_graphs(unique))
    z = embeddings[positions]
    targets = np.array([e.fitness for e in examples], dtype=np.float64)
    out, pre, hidden = _head_forward(w, z)
    residual = out - targets
    loss = float(np.mean(residual ** 2))

    d_out = 2.0 * residual / len(examples)
    d_z = _head_backward(w, g, z, pre, hidden, d_out)
    d_embeddings = np.zeros_like(embeddings)
    np.add.at(d_embeddings, positions, d_z)
    encode_backward(model.layout, w, g, cache, d_embeddings)

    _check_finite(loss, grad)
    return loss, grad


def loss_and_grad(model: PredictorModel, batch: Sequence) -> Tuple[float, np.ndarray]:
    """
    Loss and reverse-mode gradient for either head.

    Raises:
        TrainingStepError: If the loss or gradient is non-finite
    """
    if model.head_kind is HeadKind.BINARY:
        return binary_loss_and_grad(model, batch)
    return regression_loss_and_grad(model, batch)
