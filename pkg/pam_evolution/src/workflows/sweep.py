"""
Sweep controller for running many independent experiments in parallel,
and the noisy-oracle accuracy sweep built on it.
"""
import asyncio
import csv
import io
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from ..config.logging_config import LoggerMixin, get_logger
from ..config.settings import (
    ExperimentConfig,
    PredictorMode,
    PredictorModeConfig,
    StrategyKind,
)
from ..exceptions import ConfigurationError
from ..tools.run_store import RunStore
from .aggregate import aggregate_runs, checkpoints_csv, load_run
from .runner import RunSummary, run

logger = get_logger(__name__)

ORACLE_ACCURACIES = (0.6, 0.8, 1.0)
BASELINE = "vanilla"


class SweepController(LoggerMixin):
    """
    Runs independent experiments concurrently.

    Each run executes in a worker thread; a semaphore caps how many run at
    once. Failed runs are recorded and the first failure is re-raised once
    every run has finished.
    """

    def __init__(self, max_parallel: int = 4):
        """
        Initialize the controller.

        Args:
            max_parallel: Maximum number of runs executing at the same time
        """
        if max_parallel < 1:
            raise ConfigurationError(f"max_parallel must be positive, got {max_parallel}")
        self.max_parallel = max_parallel
        self.completed: Dict[str, RunSummary] = {}
        self.failed: Dict[str, str] = {}

    async def _run_one(self, label: str, config: ExperimentConfig, semaphore: asyncio.Semaphore) -> RunSummary:
        async with semaphore:
            start = time.monotonic()
            try:
                summary = await asyncio.to_thread(run, config)
            except Exception as e:
                self.failed[label] = str(e)
                self.logger.error("sweep_run_failed", run=label, error_type=type(e).__name__, error=str(e))
                raise
            self.completed[label] = summary
            self.logger.info(
                "sweep_run_finished",
                run=label,
                best_fitness=summary.best_fitness,
                elapsed_s=round(time.monotonic() - start, 3),
            )
            return summary

    async def run_all(self, configs: Mapping[str, ExperimentConfig]) -> Dict[str, RunSummary]:
        """
        Execute every labelled config.

        Returns:
            Run summaries keyed by label
        """
        self.log_method_entry("run_all", runs=len(configs), max_parallel=self.max_parallel)
        semaphore = asyncio.Semaphore(self.max_parallel)
        labels = list(configs)
        results = await asyncio.gather(
            *(self._run_one(label, configs[label], semaphore) for label in labels),
            return_exceptions=True,
        )
        self.logger.info("sweep_finished", completed=len(self.completed), failed=len(self.failed))
        for result in results:
            if isinstance(result, BaseException):
                raise result
        self.log_method_exit("run_all", completed=len(self.completed))
        return dict(zip(labels, results))


@dataclass(frozen=True)
class SweepRow:
    setting: str
    accuracy: Optional[float]
    n_runs: int
    final_mean: float
    standard_error: float


def setting_label(accuracy: float) -> str:
    return f"oracle_a{accuracy:g}"


def sweep_configs(
    config: ExperimentConfig,
    accuracies: Sequence[float] = ORACLE_ACCURACIES,
    seeds: Sequence[int] = range(5),
    baseline: bool = True,
) -> Dict[str, Dict[int, ExperimentConfig]]:
    """
    Per-setting, per-seed configs under ``config.out_dir/<setting>/seed<n>``.

    Oracle settings keep the configured predictor strategy (PAM-RT when the
    base config is vanilla); the baseline runs vanilla evolution.
    """
    if len(seeds) < 2:
        raise ConfigurationError("an oracle sweep needs at least two seeds per setting")
    base_dir = Path(config.out_dir)
    kind = config.strategy.kind if config.strategy.kind is not StrategyKind.VANILLA else StrategyKind.PAM_RT

    settings: Dict[str, Dict[str, object]] = {}
    for accuracy in accuracies:
        settings[setting_label(accuracy)] = {
            "strategy": config.strategy.model_copy(update={"kind": kind}),
            "predictor": PredictorModeConfig(mode=PredictorMode.NOISY_ORACLE, accuracy=accuracy),
        }
    if baseline:
        settings[BASELINE] = {
            "strategy": config.strategy.model_copy(update={"kind": StrategyKind.VANILLA}),
            "predictor": PredictorModeConfig(mode=PredictorMode.PERFECT_ORACLE),
        }

    return {
        label: {
            seed: config.model_copy(update={
                **update,
                "seed": seed,
                "out_dir": str(base_dir / label / f"seed{seed}"),
            })
            for seed in seeds
        }
        for label, update in settings.items()
    }


async def oracle_sweep_async(
    config: ExperimentConfig,
    accuracies: Sequence[float] = ORACLE_ACCURACIES,
    seeds: Sequence[int] = range(5),
    baseline: bool = True,
    max_parallel: int = 4,
) -> List[SweepRow]:
    """Run the sweep, aggregate each setting and write ``sweep.csv`` plus per-setting curves."""
    plan = sweep_configs(config, accuracies, seeds, baseline)
    flat = {f"{label}/seed{seed}": cfg for label, per_seed in plan.items() for seed, cfg in per_seed.items()}
    await SweepController(max_parallel).run_all(flat)

    base = RunStore(config.out_dir)
    rows: List[SweepRow] = []
    artifacts: Dict[str, str] = {}
    for label, per_seed in plan.items():
        runs = [load_run(Path(cfg.out_dir)) for cfg in per_seed.values()]
        report = aggregate_runs(runs)
        final = report.checkpoints[-1]
        accuracy = None if label == BASELINE else per_seed[next(iter(per_seed))].predictor.accuracy
        rows.append(SweepRow(label, accuracy, final.n_runs, final.mean, final.standard_error))
        artifacts[f"{label}/aggregate.csv"] = checkpoints_csv(report.checkpoints)
    artifacts["sweep.csv"] = sweep_csv(rows)
    await base.write_all(artifacts)
    logger.info("oracle_sweep_finished", settings=len(rows), seeds=len(seeds))
    return rows


def oracle_sweep(
    config: ExperimentConfig,
    accuracies: Sequence[float] = ORACLE_ACCURACIES,
    seeds: Sequence[int] = range(5),
    baseline: bool = True,
    max_parallel: int = 4,
) -> List[SweepRow]:
    return asyncio.run(oracle_sweep_async(config, accuracies, seeds, baseline, max_parallel))


def sweep_csv(rows: List[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["setting", "accuracy", "n_runs", "final_mean_best_fitness", "standard_error"])
    for r in rows:
        accuracy = "" if r.accuracy is None else repr(r.accuracy)
        writer.writerow([r.setting, accuracy, r.n_runs, repr(r.final_mean), repr(r.standard_error)])
    return buffer.getvalue()
