"""
Counterfactual evaluation of the online predictor.

Evolution runs with the vanilla mutator while the predictor trains as
usual. At every step a fan-out of extra children is drawn from the selected
parent and scored against it; a child is a positive when its true fitness
beats the parent's. The stream supports unbiased accuracy, precision and
recall estimates of the model as it would have been used.
"""
import csv
import io
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from configs.local_config import LOCAL_CONFIG
from ..config.logging_config import get_logger
from ..config.settings import ExperimentConfig, StrategyKind
from ..evolution.population import Candidate
from ..evolution.regevo import fitness_lookup
from ..exceptions import AnalysisError
from ..strategies.strategies import StrategyOutcome
from ..symreg.operators import mutate_graph
from ..training.online import OnlineEvolution, OnlineResult

logger = get_logger(__name__)

DEFAULT_FANOUT = LOCAL_CONFIG["counterfactual_fanout"]
THRESHOLD_POINTS = LOCAL_CONFIG["threshold_points"]
HISTOGRAM_BINS = LOCAL_CONFIG["histogram_bins"]


@dataclass(frozen=True)
class CounterfactualRecord:
    """Scores and true fitnesses of the fan-out children at one step."""
    step: int
    parent_fitness: float
    candidate_scores: Sequence[float]
    candidate_fitnesses: Sequence[float]

    def __post_init__(self) -> None:
        if len(self.candidate_scores) != len(self.candidate_fitnesses):
            raise AnalysisError(
                "scores and fitnesses must have equal length",
                {"step": self.step, "scores": len(self.candidate_scores), "fitnesses": len(self.candidate_fitnesses)},
            )

    @property
    def labels(self) -> np.ndarray:
        return np.asarray(self.candidate_fitnesses) > self.parent_fitness


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    accuracy: float
    precision: float
    recall: float


@dataclass(frozen=True)
class HistogramBin:
    bin_low: float
    bin_high: float
    count_negative: int
    count_positive: int


def confusion(scores: np.ndarray, labels: np.ndarray, threshold: float):
    """(tp, fp, tn, fn) with ``score > threshold`` read as a positive prediction."""
    predicted = scores > threshold
    tp = int(np.sum(predicted & labels))
    fp = int(np.sum(predicted & ~labels))
    tn = int(np.sum(~predicted & ~labels))
    fn = int(np.sum(~predicted & labels))
    return tp, fp, tn, fn


def curve_point(scores: np.ndarray, labels: np.ndarray, threshold: float) -> CurvePoint:
    """
    Precision is 1 when nothing is predicted positive; recall is 0 when
    there are no actual positives.
    """
    tp, fp, tn, fn = confusion(scores, labels, threshold)
    total = tp + fp + tn + fn
    return CurvePoint(
        threshold=threshold,
        accuracy=(tp + tn) / total if total else 0.0,
        precision=tp / (tp + fp) if tp + fp else 1.0,
        recall=tp / (tp + fn) if tp + fn else 0.0,
    )


def threshold_curves(
    scores: Sequence[float], labels: Sequence[bool], points: int = THRESHOLD_POINTS
) -> List[CurvePoint]:
    """Accuracy, precision and recall at ``points`` uniform thresholds in [0, 1]."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    return [curve_point(s, y, float(t)) for t in np.linspace(0.0, 1.0, points)]


def score_histograms(
    scores: Sequence[float], labels: Sequence[bool], bins: int = HISTOGRAM_BINS
) -> List[HistogramBin]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    edges = np.linspace(0.0, 1.0, bins + 1)
    negative, _ = np.histogram(s[~y], bins=edges)
    positive, _ = np.histogram(s[y], bins=edges)
    return [
        HistogramBin(float(edges[i]), float(edges[i + 1]), int(negative[i]), int(positive[i]))
        for i in range(bins)
    ]


class CounterfactualCollector:
    """Step observer that scores a fan-out of extra children against each parent."""

    def __init__(self, fanout: int, rng: np.random.Generator, min_data: int):
        self.fanout = fanout
        self.rng = rng
        self.min_data = min_data
        self.records: List[CounterfactualRecord] = []
        self._truth: Optional[Callable] = None

    def on_step(self, engine: OnlineEvolution, outcome: StrategyOutcome, candidate: Candidate) -> None:
        if engine.samples < self.min_data:
            return
        if self._truth is None:
            self._truth = fitness_lookup(engine.task)
        parent = outcome.parent.graph
        children = [mutate_graph(parent, self.rng) for _ in range(self.fanout)]
        scores = [engine.scorer.score(child, parent).probability for child in children]
        fitnesses = [self._truth(child) for child in children]
        self.records.append(CounterfactualRecord(engine.samples, outcome.parent_fitness, scores, fitnesses))


@dataclass
class CounterfactualReport:
    records: List[CounterfactualRecord]
    curves: List[CurvePoint]
    histogram: List[HistogramBin]
    accuracy_at_half: float
    base_positive_rate: float
    run: Optional[OnlineResult] = field(default=None, repr=False)


def flatten_records(records: List[CounterfactualRecord]) -> Tuple[np.ndarray, np.ndarray]:
    """All fan-out scores and positive labels of a record stream."""
    if not records:
        return np.zeros(0), np.zeros(0, dtype=bool)
    scores = np.concatenate([np.asarray(r.candidate_scores, dtype=np.float64) for r in records])
    labels = np.concatenate([r.labels for r in records])
    return scores, labels


def summarize_records(records: List[CounterfactualRecord]) -> CounterfactualReport:
    scores, labels = flatten_records(records)
    return CounterfactualReport(
        records=records,
        curves=threshold_curves(scores, labels),
        histogram=score_histograms(scores, labels),
        accuracy_at_half=curve_point(scores, labels, 0.5).accuracy,
        base_positive_rate=float(labels.mean()) if labels.size else 0.0,
    )


def counterfactual_run(config: ExperimentConfig, fanout: int = DEFAULT_FANOUT) -> CounterfactualReport:
    """
    Vanilla evolution with the predictor trained but never steering, plus
    the fan-out record stream and its summary curves.
    """
    config = config.model_copy(
        update={"strategy": config.strategy.model_copy(update={"kind": StrategyKind.VANILLA})}
    )
    engine = OnlineEvolution(config)
    collector = CounterfactualCollector(fanout, engine.streams["counterfactual"], config.schedule.min_data)
    engine.observer = collector
    result = engine.run()
    report = summarize_records(collector.records)
    report.run = result
    logger.info(
        "counterfactual_finished",
        steps=len(collector.records),
        accuracy_at_half=report.accuracy_at_half,
        base_positive_rate=report.base_positive_rate,
    )
    return report


def records_csv(records: List[CounterfactualRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["step", "parent_fitness", "child_index", "score", "child_fitness"])
    for record in records:
        for i, (score, fit) in enumerate(zip(record.candidate_scores, record.candidate_fitnesses)):
            writer.writerow([record.step, repr(float(record.parent_fitness)), i, repr(float(score)), repr(float(fit))])
    return buffer.getvalue()


def curves_csv(curves: List[CurvePoint]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["threshold", "accuracy", "precision", "recall"])
    for p in curves:
        writer.writerow([repr(p.threshold), repr(p.accuracy), repr(p.precision), repr(p.recall)])
    return buffer.getvalue()


def histogram_csv(bins: List[HistogramBin]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["bin_low", "bin_high", "count_negative", "count_positive"])
    for b in bins:
        writer.writerow([repr(b.bin_low), repr(b.bin_high), b.count_negative, b.count_positive])
    return buffer.getvalue()
