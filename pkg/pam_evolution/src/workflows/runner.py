"""
Single-run driver: executes one experiment and writes its artifacts.
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from ..analysis.uniqueness import uniqueness_csv, uniqueness_curves
from ..config.logging_config import get_logger
from ..config.settings import ExperimentConfig
from ..dag.graph import DEFAULT_MAX_SLOTS, ProgramGraph
from ..dag.serialization import dump_candidates, load_candidates
from ..exceptions import CheckpointError
from ..predictor.checkpoint import model_to_bytes
from ..symreg.tasks import sample_points_csv
from ..tools.run_store import RunStore
from ..training.online import OnlineEvolution, OnlineResult
from ..training.run_log import render_log_csv

logger = get_logger(__name__)


@dataclass(frozen=True)
class RunSummary:
    run_dir: Path
    best_fitness: float
    summary: Dict[str, Any]


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return value


def build_summary(result: OnlineResult) -> Dict[str, Any]:
    """Headline numbers of a finished run."""
    config = result.config
    last_training = None
    if result.training_reports:
        last_training = {
            k: _finite_or_none(v) if isinstance(v, float) else v
            for k, v in result.training_reports[-1].to_dict().items()
        }
    return {
        "task": config.task.value,
        "strategy": config.strategy.kind.value,
        "predictor": config.predictor.mode.value,
        "seed": config.seed,
        "config_digest": config.digest(),
        "total_samples": config.samples,
        "population_size": config.population_size,
        "best_fitness": result.best.fitness,
        "best_rmse": _finite_or_none(result.best.rmse),
        "evaluations": result.stats.evaluations,
        "fec_hits": result.stats.fec_hits,
        "mean_attempts": result.mean_attempts,
        "hill_climb_rate": result.hill_climb_rate,
        "training_triggers": len(result.training_reports),
        "last_training": last_training,
    }


def result_artifacts(result: OnlineResult) -> Dict[str, Union[str, bytes]]:
    config = result.config
    artifacts: Dict[str, Union[str, bytes]] = {
        "config.json": config.model_dump_json(indent=2) + "\n",
        "log.csv": render_log_csv(result.records),
        "best.txt": dump_candidates([(result.best.graph, result.best.fitness)]),
        "population.txt": dump_candidates([(c.graph, c.fitness) for c in result.population]),
        "sample_points.csv": sample_points_csv(result.task),
        "uniqueness.csv": uniqueness_csv(uniqueness_curves(result.records, config.population_size)),
        "summary.json": json.dumps(build_summary(result), indent=2, sort_keys=True) + "\n",
    }
    if result.model is not None:
        artifacts["model.bin"] = model_to_bytes(result.model)
    return artifacts


def run(config: ExperimentConfig, resume: bool = False) -> RunSummary:
    """
    Execute one experiment and write every artifact into ``config.out_dir``.

    Raises:
        CheckpointError: If ``resume`` is set but no usable checkpoint exists
    """
    store = RunStore(config.out_dir)
    checkpoint_dir = store.checkpoint_dir if config.checkpoint_every else None
    if resume:
        if not (store.checkpoint_dir / "state.json").exists():
            raise CheckpointError(f"nothing to resume in {store.checkpoint_dir}")
        engine = OnlineEvolution.resume(config, store.checkpoint_dir)
    else:
        engine = OnlineEvolution(config)

    result = engine.run(checkpoint_dir)
    store.write_all_sync(result_artifacts(result))
    logger.info("run_written", run_dir=str(store.run_dir), best_fitness=result.best.fitness)
    return RunSummary(store.run_dir, result.best.fitness, build_summary(result))


def load_population_snapshot(
    path: Union[str, Path], max_slots: int = DEFAULT_MAX_SLOTS
) -> List[Tuple[ProgramGraph, float]]:
    """Read back a ``population.txt`` (or ``best.txt``) dump as (graph, fitness) pairs."""
    return load_candidates(Path(path).read_text(encoding="utf-8"), max_slots)
