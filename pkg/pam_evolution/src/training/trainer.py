"""
Mini-batch training of predictor models on replay records.
"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from ..config.logging_config import get_logger
from ..config.settings import HeadKind, OptimizerConfig
from ..exceptions import TrainingStepError
from ..predictor.model import LabeledPair, PredictorModel, loss_and_grad
from ..predictor.optimizer import AdamState, sgd_step
from ..predictor.scorers import PairwiseScorer
from .replay import ReplayRecord, make_epoch_examples, make_epoch_pairs

logger = get_logger(__name__)


@dataclass
class TrainingReport:
    """Outcome of one training trigger."""
    epochs: int = 0
    examples: int = 0
    steps: int = 0
    skipped_steps: int = 0
    empty_epochs: int = 0
    mean_loss: float = float("nan")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _batches(items: Sequence, batch_size: int) -> List[Sequence]:
    return [items[i: i + batch_size] for i in range(0, len(items), batch_size)]


def train_predictor(
    model: PredictorModel,
    state: AdamState,
    records: List[ReplayRecord],
    epochs: int,
    batch_size: int,
    optimizer: OptimizerConfig,
    rng: np.random.Generator,
) -> Tuple[PredictorModel, AdamState, TrainingReport]:
    """
    Run ``epochs`` passes over freshly built pairs (binary head) or shuffled
    records (regression head).

    A step whose loss or gradient is non-finite is skipped with a warning;
    training carries on with the next batch.
    """
    report = TrainingReport(epochs=epochs)
    losses: List[float] = []
    for epoch in range(epochs):
        if model.head_kind is HeadKind.BINARY:
            items: Sequence = make_epoch_pairs(records, rng)
        else:
            items = make_epoch_examples(records, rng)
        if not items:
            report.empty_epochs += 1
            continue
        report.examples += len(items)
        for batch in _batches(items, batch_size):
            try:
                loss, grad = loss_and_grad(model, batch)
            except TrainingStepError as e:
                report.skipped_steps += 1
                logger.warning("training_step_skipped", epoch=epoch, error=e.message, **e.details)
                continue
            model, state = sgd_step(model, grad, state, optimizer)
            losses.append(loss)
            report.steps += 1

    if losses:
        report.mean_loss = float(np.mean(losses))
    return model, state, report


def pair_accuracy(scorer: PairwiseScorer, pairs: Sequence[LabeledPair]) -> float:
    """Fraction of held-out pairs whose ordering the scorer gets right; NaN without pairs."""
    if not pairs:
        return float("nan")
    correct = sum(
        scorer.score(p.first, p.second).prefers_first == (p.label == 1.0) for p in pairs
    )
    return correct / len(pairs)
