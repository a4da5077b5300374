"""
Multi-seed aggregation of run logs: mean best fitness with +/-2 standard
error bands, and samples needed to reach fitness thresholds.
"""
import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from ..config.logging_config import get_logger
from ..config.settings import ExperimentConfig
from ..exceptions import AggregationError, ConfigurationError
from ..training.run_log import RunRecord, parse_log_csv

logger = get_logger(__name__)

CENSORED = -1


@dataclass
class LoadedRun:
    run_dir: Path
    config: ExperimentConfig
    best_by_sample: np.ndarray

    @property
    def samples(self) -> int:
        return self.best_by_sample.size - 1


@dataclass(frozen=True)
class CheckpointRow:
    checkpoint: int
    n_runs: int
    mean: float
    standard_error: float

    @property
    def lower(self) -> float:
        return self.mean - 2.0 * self.standard_error

    @property
    def upper(self) -> float:
        return self.mean + 2.0 * self.standard_error


@dataclass(frozen=True)
class ThresholdRow:
    threshold: float
    run: str
    samples: int
    censored: bool


@dataclass
class AggregateReport:
    checkpoints: List[CheckpointRow]
    thresholds: List[ThresholdRow]


def best_series(records: Sequence[RunRecord]) -> np.ndarray:
    """Best-so-far fitness indexed by sample (index 0 is the initial population)."""
    last = max(r.sample_index for r in records)
    series = np.full(last + 1, np.nan)
    for record in records:
        series[record.sample_index] = record.best_fitness
    return series


def load_run(run_dir: Path) -> LoadedRun:
    """
    Raises:
        AggregationError: If the config or log is missing
    """
    config_path, log_path = run_dir / "config.json", run_dir / "log.csv"
    if not config_path.exists() or not log_path.exists():
        raise AggregationError(f"{run_dir} is not a finished run directory", {"run_dir": str(run_dir)})
    try:
        config = ExperimentConfig.model_validate_json(config_path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise AggregationError(f"{config_path} is not a valid experiment config", {"errors": e.error_count()})
    records = parse_log_csv(log_path.read_text(encoding="utf-8"))
    if not records:
        raise AggregationError(f"{log_path} holds no rows")
    return LoadedRun(run_dir, config, best_series(records))


def mean_and_se(values: Sequence[float]):
    arr = np.asarray(values, dtype=np.float64)
    se = float(np.std(arr, ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return float(arr.mean()), se


def samples_to_threshold(best: np.ndarray, threshold: float) -> Optional[int]:
    reached = np.nonzero(best >= threshold)[0]
    return int(reached[0]) if reached.size else None


def aggregate_runs(
    runs: Sequence[LoadedRun],
    checkpoints: Optional[Sequence[int]] = None,
    thresholds: Sequence[float] = (0.9,),
) -> AggregateReport:
    """
    Raises:
        AggregationError: With fewer than two runs
        ConfigurationError: If the runs differ in anything but seed and output directory
    """
    if len(runs) < 2:
        raise AggregationError(f"aggregation needs at least two runs, got {len(runs)}")
    digests = {run.config.digest() for run in runs}
    if len(digests) != 1:
        raise ConfigurationError(
            "runs were produced with different configurations",
            {"runs": {str(r.run_dir): r.config.digest() for r in runs}},
        )
    samples = min(run.samples for run in runs)
    if checkpoints is None:
        checkpoints = sorted({int(round(c)) for c in np.linspace(0, samples, 11)})

    rows = []
    for checkpoint in checkpoints:
        if not 0 <= checkpoint <= samples:
            raise AggregationError(f"checkpoint {checkpoint} outside [0, {samples}]")
        mean, se = mean_and_se([run.best_by_sample[checkpoint] for run in runs])
        rows.append(CheckpointRow(checkpoint, len(runs), mean, se))

    threshold_rows = []
    for threshold in thresholds:
        reached = []
        for run in runs:
            hit = samples_to_threshold(run.best_by_sample, threshold)
            threshold_rows.append(ThresholdRow(threshold, str(run.run_dir), CENSORED if hit is None else hit, hit is None))
            reached.append(math.inf if hit is None else hit)
        median = float(np.median(reached))
        censored = math.isinf(median)
        threshold_rows.append(ThresholdRow(threshold, "median", CENSORED if censored else int(median), censored))
    return AggregateReport(rows, threshold_rows)


def aggregate(
    run_dirs: Sequence[Path],
    checkpoints: Optional[Sequence[int]] = None,
    thresholds: Sequence[float] = (0.9,),
) -> AggregateReport:
    """Load run directories and aggregate them."""
    runs = [load_run(Path(d)) for d in run_dirs]
    report = aggregate_runs(runs, checkpoints, thresholds)
    logger.info("runs_aggregated", runs=len(runs), checkpoints=len(report.checkpoints))
    return report


def checkpoints_csv(rows: List[CheckpointRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["checkpoint", "n_runs", "mean_best_fitness", "standard_error", "lower_band", "upper_band"])
    for r in rows:
        writer.writerow([r.checkpoint, r.n_runs, repr(r.mean), repr(r.standard_error), repr(r.lower), repr(r.upper)])
    return buffer.getvalue()


def thresholds_csv(rows: List[ThresholdRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["threshold", "run", "samples_to_threshold", "censored"])
    for r in rows:
        writer.writerow([repr(r.threshold), r.run, r.samples, int(r.censored)])
    return buffer.getvalue()
