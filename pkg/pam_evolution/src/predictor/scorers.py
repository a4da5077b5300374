"""
Pairwise scorers used by the mutation strategies.

A scorer answers "is x1 better than x2?". Learned scorers read the latest
published model snapshot on every call; oracles look up true fitness and
flip the answer with probability ``1 - accuracy``.
"""
import math
import threading
from abc import ABC, abstractmethod
from typing import Callable, Optional, Sequence

import numpy as np

from ..config.settings import HeadKind
from ..dag.graph import ProgramGraph
from ..exceptions import ConfigurationError
from .model import (
    BinaryScore,
    PredictorModel,
    encode_graphs,
    pair_logits,
    predict_fitnesses,
    predict_pair,
)

FitnessLookup = Callable[[ProgramGraph], float]


class PredictorHandle:
    """
    Holder of the current model snapshot.

    The trainer publishes a new immutable model after each trigger; readers
    always get either the old or the new snapshot, never a mix.
    """

    def __init__(self, model: Optional[PredictorModel] = None):
        self._lock = threading.Lock()
        self._model = model
        self._version = 0 if model is None else 1

    def publish(self, model: PredictorModel) -> None:
        with self._lock:
            self._model = model
            self._version += 1

    def snapshot(self) -> PredictorModel:
        with self._lock:
            model = self._model
        if model is None:
            raise ConfigurationError("no predictor model has been published")
        return model

    @property
    def version(self) -> int:
        return self._version


class PairwiseScorer(ABC):
    """Source of pairwise judgements f(x1, x2)."""

    @abstractmethod
    def score(self, x1: ProgramGraph, x2: ProgramGraph) -> BinaryScore:
        """Score that ``x1`` is better than ``x2``."""

    def pairwise_logits(self, graphs: Sequence[ProgramGraph]) -> np.ndarray:
        """
        Logit matrix L with L[i, j] = score(graphs[i], graphs[j]).logit.
        The diagonal is zero and never used.
        """
        n = len(graphs)
        logits = np.zeros((n, n), dtype=np.float64)
        for i in range(n):
            for j in range(n):
                if i != j:
                    logits[i, j] = self.score(graphs[i], graphs[j]).logit
        return logits


class LearnedScorer(PairwiseScorer):
    """Binary-head model behind a :class:`PredictorHandle`."""

    def __init__(self, handle: PredictorHandle):
        self.handle = handle

    def score(self, x1: ProgramGraph, x2: ProgramGraph) -> BinaryScore:
        return predict_pair(self.handle.snapshot(), x1, x2)

    def pairwise_logits(self, graphs: Sequence[ProgramGraph]) -> np.ndarray:
        model = self.handle.snapshot()
        n = len(graphs)
        embeddings = encode_graphs(model, graphs)
        first, second = np.nonzero(~np.eye(n, dtype=bool))
        logits = np.zeros((n, n), dtype=np.float64)
        logits[first, second] = pair_logits(model, embeddings, first, second)
        return logits


class RegressionScorer(PairwiseScorer):
    """
    Regression-head model used as a pairwise judge: the logit is the
    difference of predicted fitnesses and the probability is 1 when the
    first prediction is strictly higher.
    """

    def __init__(self, handle: PredictorHandle):
        self.handle = handle

    def score(self, x1: ProgramGraph, x2: ProgramGraph) -> BinaryScore:
        model = self.handle.snapshot()
        if model.head_kind is not HeadKind.REGRESSION:
            raise ConfigurationError("RegressionScorer needs a regression-head model")
        f1, f2 = predict_fitnesses(model, [x1, x2])
        diff = float(f1 - f2)
        return BinaryScore(logit=diff, probability=1.0 if diff > 0 else 0.0)


def _oracle_score(outcome: int) -> BinaryScore:
    if outcome:
        return BinaryScore(logit=math.inf, probability=1.0)
    return BinaryScore(logit=-math.inf, probability=0.0)


def noisy_oracle_predict(
    truth: FitnessLookup,
    accuracy: float,
    x1: ProgramGraph,
    x2: ProgramGraph,
    rng: np.random.Generator,
) -> BinaryScore:
    """
    Ground-truth ordering flipped with probability ``1 - accuracy``.

    The ordering is strict: an exact tie means ``x1`` is not better, so the
    perfect oracle never accepts an equal-fitness child.
    """
    ordering = int(truth(x1) > truth(x2))
    correct = rng.random() < accuracy
    return _oracle_score(ordering if correct else 1 - ordering)


class NoisyOracle(PairwiseScorer):
    """Simulated predictor of known accuracy; ``accuracy=1`` is the perfect oracle."""

    def __init__(self, truth: FitnessLookup, accuracy: float, rng: np.random.Generator):
        if not 0.5 <= accuracy <= 1.0:
            raise ConfigurationError(f"oracle accuracy must be in [0.5, 1], got {accuracy}")
        self.truth = truth
        self.accuracy = accuracy
        self.rng = rng

    def score(self, x1: ProgramGraph, x2: ProgramGraph) -> BinaryScore:
        return noisy_oracle_predict(self.truth, self.accuracy, x1, x2, self.rng)

    def pairwise_logits(self, graphs: Sequence[ProgramGraph]) -> np.ndarray:
        n = len(graphs)
        values = np.array([self.truth(g) for g in graphs], dtype=np.float64)
        ordering = (values[:, None] > values[None, :]).astype(np.int64)
        correct = self.rng.random((n, n)) < self.accuracy
        outcome = np.where(correct, ordering, 1 - ordering)
        logits = np.where(outcome == 1, math.inf, -math.inf)
        np.fill_diagonal(logits, 0.0)
        return logits
