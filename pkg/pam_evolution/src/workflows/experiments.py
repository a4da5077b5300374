"""
Offline experiments: binary-vs-regression predictor ablation, the
hill-climb rate check and the counterfactual study.
"""
import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from ..analysis.counterfactual import (
    DEFAULT_FANOUT,
    CounterfactualReport,
    counterfactual_run,
    curves_csv,
    histogram_csv,
    records_csv,
)
from ..analysis.hillclimb import (
    HillClimbParams,
    hill_climb_grid,
    modified_rate,
    p_accept,
    simulate_modified_rate,
)
from ..config.logging_config import get_logger
from ..config.settings import (
    EncoderConfig,
    ExperimentConfig,
    HeadKind,
    PredictorMode,
    PredictorModeConfig,
    StrategyKind,
)
from ..exceptions import ConfigurationError
from ..predictor.model import PredictorModel
from ..predictor.optimizer import AdamState
from ..predictor.scorers import LearnedScorer, PairwiseScorer, PredictorHandle, RegressionScorer
from ..tools.run_store import RunStore
from ..training.online import OnlineEvolution
from ..training.replay import ReplayRecord, make_epoch_pairs
from ..training.run_log import render_log_csv
from ..training.trainer import pair_accuracy, train_predictor

logger = get_logger(__name__)

DATASET_SIZE = 10_000
ABLATION_EPOCHS = 1000
TRAIN_FRACTION = 0.8
TRAINING_SEEDS = 3

HILLCLIMB_QS = (0.05, 0.1, 0.3, 0.5)
HILLCLIMB_ACCURACIES = (0.6, 0.8, 1.0)
SURFACE_ACCURACIES = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


# ---------------------------------------------------------------------------
# Predictor ablation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AblationRow:
    head: HeadKind
    num_layers: int
    training_seed: int
    accuracy: float


@dataclass
class AblationReport:
    rows: List[AblationRow]
    train_size: int
    test_size: int
    test_pairs: int

    def medians(self) -> Dict[Tuple[HeadKind, int], float]:
        """Median held-out accuracy per (head, encoder depth) over training seeds."""
        groups: Dict[Tuple[HeadKind, int], List[float]] = {}
        for row in self.rows:
            groups.setdefault((row.head, row.num_layers), []).append(row.accuracy)
        return {key: float(np.median(values)) for key, values in groups.items()}

    def summary(self) -> Dict[str, object]:
        return {
            "train_size": self.train_size,
            "test_size": self.test_size,
            "test_pairs": self.test_pairs,
            "median_accuracy": [
                {"head": head.value, "num_layers": layers, "accuracy": acc}
                for (head, layers), acc in sorted(self.medians().items(), key=lambda kv: (kv[0][0].value, kv[0][1]))
            ],
        }


def collect_dataset(config: ExperimentConfig, dataset_size: int = DATASET_SIZE) -> List[ReplayRecord]:
    """
    Run vanilla evolution until ``dataset_size`` candidates (initial population
    included) have been evaluated, and return them all.

    Raises:
        ConfigurationError: If the dataset would not cover the initial population
    """
    if dataset_size < max(config.population_size, 2):
        raise ConfigurationError(
            f"dataset size {dataset_size} is smaller than the population ({config.population_size})"
        )
    collect = config.model_copy(update={
        "strategy": config.strategy.model_copy(update={"kind": StrategyKind.VANILLA}),
        "predictor": PredictorModeConfig(mode=PredictorMode.PERFECT_ORACLE),
        "total_samples": dataset_size - config.population_size,
        "replay_capacity": dataset_size,
        "checkpoint_every": 0,
    })
    engine = OnlineEvolution(collect)
    engine.run()
    records = engine.replay.records()
    logger.info("dataset_collected", size=len(records), task=config.task.value, seed=config.seed)
    return records


def split_dataset(
    records: Sequence[ReplayRecord], rng: np.random.Generator, train_fraction: float = TRAIN_FRACTION
) -> Tuple[List[ReplayRecord], List[ReplayRecord]]:
    """Random train/test split. Both sides need at least two records."""
    order = rng.permutation(len(records))
    cut = int(round(len(records) * train_fraction))
    train = [records[int(i)] for i in order[:cut]]
    test = [records[int(i)] for i in order[cut:]]
    if len(train) < 2 or len(test) < 2:
        raise ConfigurationError(
            f"split of {len(records)} records at {train_fraction} leaves too few on one side"
        )
    return train, test


def _scorer_for(model: PredictorModel) -> PairwiseScorer:
    handle = PredictorHandle(model)
    if model.head_kind is HeadKind.BINARY:
        return LearnedScorer(handle)
    return RegressionScorer(handle)


def train_head(
    config: ExperimentConfig,
    head: HeadKind,
    encoder: EncoderConfig,
    train: List[ReplayRecord],
    epochs: int,
    seed_sequence: np.random.SeedSequence,
) -> PredictorModel:
    """Fresh model of the given head, trained offline on ``train``."""
    init_seed, train_seed = seed_sequence.spawn(2)
    model = PredictorModel.initialize(encoder, np.random.default_rng(init_seed), head)
    model, _, report = train_predictor(
        model,
        AdamState.zeros(model.num_params),
        train,
        epochs,
        config.schedule.batch_size,
        config.optimizer,
        np.random.default_rng(train_seed),
    )
    logger.info(
        "ablation_model_trained",
        head=head.value,
        num_layers=encoder.num_layers,
        steps=report.steps,
        mean_loss=report.mean_loss,
    )
    return model


def ablate_predictor(
    config: ExperimentConfig,
    dataset_size: int = DATASET_SIZE,
    epochs: int = ABLATION_EPOCHS,
    training_seeds: int = TRAINING_SEEDS,
    layers: Sequence[int] = (),
) -> AblationReport:
    """
    Compare binary and regression heads on held-out pair accuracy.

    Both heads train on the same 80% split of a vanilla-evolution dataset
    and are scored on one fixed set of test pairs. ``layers`` adds binary
    heads at further encoder depths.
    """
    if training_seeds < 1:
        raise ConfigurationError("at least one training seed is required")
    records = collect_dataset(config, dataset_size)
    split_seed, *seed_sequences = np.random.SeedSequence(config.seed).spawn(training_seeds + 1)
    split_rng = np.random.default_rng(split_seed)
    train, test = split_dataset(records, split_rng)
    test_pairs = make_epoch_pairs(test, split_rng)

    variants: List[Tuple[HeadKind, EncoderConfig]] = [
        (HeadKind.BINARY, config.encoder),
        (HeadKind.REGRESSION, config.encoder),
    ]
    for depth in dict.fromkeys(layers):
        if depth < 1:
            raise ConfigurationError(f"encoder depth must be positive, got {depth}")
        if depth != config.encoder.num_layers:
            variants.append((HeadKind.BINARY, config.encoder.model_copy(update={"num_layers": depth})))

    rows = []
    for training_seed, seq in enumerate(seed_sequences):
        for (head, encoder), child in zip(variants, seq.spawn(len(variants))):
            model = train_head(config, head, encoder, train, epochs, child)
            accuracy = pair_accuracy(_scorer_for(model), test_pairs)
            rows.append(AblationRow(head, encoder.num_layers, training_seed, accuracy))
            logger.info(
                "ablation_evaluated",
                head=head.value,
                num_layers=encoder.num_layers,
                training_seed=training_seed,
                accuracy=accuracy,
            )
    return AblationReport(rows, len(train), len(test), len(test_pairs))


def ablation_csv(rows: List[AblationRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["head", "num_layers", "training_seed", "accuracy"])
    for r in rows:
        writer.writerow([r.head.value, r.num_layers, r.training_seed, repr(r.accuracy)])
    return buffer.getvalue()


def write_ablation(report: AblationReport, out_dir: Union[str, Path]) -> Path:
    store = RunStore(out_dir)
    store.write_all_sync({
        "ablation.csv": ablation_csv(report.rows),
        "ablation_summary.json": json.dumps(report.summary(), indent=2, sort_keys=True) + "\n",
    })
    return store.run_dir


# ---------------------------------------------------------------------------
# Hill-climb check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HillClimbRow:
    q: float
    a: float
    p_accept: float
    closed_form: float
    monte_carlo: float

    @property
    def abs_error(self) -> float:
        return abs(self.closed_form - self.monte_carlo)


def hillclimb_check(
    qs: Sequence[float] = HILLCLIMB_QS,
    accuracies: Sequence[float] = HILLCLIMB_ACCURACIES,
    max_attempts: int = 10_000,
    trials: int = 1_000_000,
    seed: int = 0,
) -> List[HillClimbRow]:
    """Closed-form modified hill-climb rate against Monte Carlo over a (q, a) grid."""
    grid = hill_climb_grid(qs, accuracies)
    rows = []
    for hp, child in zip(grid, np.random.SeedSequence(seed).spawn(len(grid))):
        estimate = simulate_modified_rate(hp, max_attempts, trials, np.random.default_rng(child))
        rows.append(HillClimbRow(hp.q, hp.a, p_accept(hp), modified_rate(hp), estimate))
    worst = max(r.abs_error for r in rows) if rows else 0.0
    logger.info("hillclimb_checked", points=len(rows), trials=trials, max_abs_error=worst)
    return rows


def hill_climb_surface(
    qs: Sequence[float] = tuple(np.round(np.linspace(0.01, 0.99, 99), 2)),
    accuracies: Sequence[float] = SURFACE_ACCURACIES,
) -> List[Tuple[float, float, float, float]]:
    """Dense closed-form (q, a, p_accept, modified_rate) surface."""
    return [
        (hp.q, hp.a, p_accept(hp), modified_rate(hp))
        for hp in (HillClimbParams(float(q), float(a)) for q in qs for a in accuracies)
    ]


def hillclimb_csv(rows: List[HillClimbRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["q", "a", "p_accept", "closed_form", "monte_carlo", "abs_error"])
    for r in rows:
        writer.writerow([repr(r.q), repr(r.a), repr(r.p_accept), repr(r.closed_form), repr(r.monte_carlo), repr(r.abs_error)])
    return buffer.getvalue()


def surface_csv(points: List[Tuple[float, float, float, float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["q", "a", "p_accept", "modified_rate"])
    for point in points:
        writer.writerow([repr(float(v)) for v in point])
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Counterfactual study
# ---------------------------------------------------------------------------

def counterfactual_summary(report: CounterfactualReport, fanout: int) -> Dict[str, object]:
    summary: Dict[str, object] = {
        "steps": len(report.records),
        "fanout": fanout,
        "candidates": sum(len(r.candidate_scores) for r in report.records),
        "accuracy_at_half": report.accuracy_at_half,
        "base_positive_rate": report.base_positive_rate,
    }
    if report.run is not None:
        summary["best_fitness"] = report.run.best.fitness
        summary["training_triggers"] = len(report.run.training_reports)
    return summary


def run_counterfactual(config: ExperimentConfig, fanout: int = DEFAULT_FANOUT) -> CounterfactualReport:
    """Run the counterfactual study and write its artifacts into ``config.out_dir``."""
    report = counterfactual_run(config, fanout)
    effective = report.run.config if report.run is not None else config
    artifacts: Dict[str, Union[str, bytes]] = {
        "config.json": effective.model_dump_json(indent=2) + "\n",
        "counterfactual.csv": records_csv(report.records),
        "curves.csv": curves_csv(report.curves),
        "histogram.csv": histogram_csv(report.histogram),
        "counterfactual_summary.json": json.dumps(counterfactual_summary(report, fanout), indent=2, sort_keys=True) + "\n",
    }
    if report.run is not None:
        artifacts["log.csv"] = render_log_csv(report.run.records)
    RunStore(config.out_dir).write_all_sync(artifacts)
    return report
