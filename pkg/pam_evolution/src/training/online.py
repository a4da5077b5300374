"""
Online evolution: regularized evolution steered by a predictor that is
trained on the fly from a replay buffer of evaluated candidates.
"""
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Protocol, Tuple

import numpy as np

from ..config.logging_config import LoggerMixin
from ..config.settings import ExperimentConfig, HeadKind, PredictorMode
from ..dag.hashing import format_hash, structural_hash
from ..dag.serialization import deserialize, serialize
from ..evolution.fec import EvaluationStats, FecCache
from ..evolution.population import Candidate, PopulationBuffer
from ..evolution.regevo import evaluate_outcome, fitness_lookup, init_population
from ..exceptions import CheckpointError, ConfigurationError, EvolutionError
from ..predictor.checkpoint import model_from_bytes, model_to_bytes
from ..predictor.model import PredictorModel
from ..predictor.optimizer import AdamState
from ..predictor.scorers import LearnedScorer, NoisyOracle, PairwiseScorer, PredictorHandle
from ..strategies.strategies import StrategyOutcome, build_strategy, select_strategy
from ..symreg.tasks import SymRegTask, make_task
from .replay import ReplayBuffer, ReplayRecord
from .run_log import PHASE_CHILD, PHASE_INIT, RunRecord
from .trainer import TrainingReport, train_predictor

STATE_SCHEMA = "run_state/1"
INIT_STRATEGY = "random"
STREAM_NAMES = ("evolution", "gate", "training", "predictor_init", "oracle", "counterfactual")


class RunStreams:
    """Independent generators spawned from one run seed."""

    def __init__(self, seed: int):
        children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
        self.generators: Dict[str, np.random.Generator] = {
            name: np.random.Generator(np.random.PCG64(child))
            for name, child in zip(STREAM_NAMES, children)
        }

    def __getitem__(self, name: str) -> np.random.Generator:
        return self.generators[name]

    def state(self) -> Dict[str, Any]:
        return {name: gen.bit_generator.state for name, gen in self.generators.items()}

    def restore(self, state: Dict[str, Any]) -> None:
        for name, gen in self.generators.items():
            gen.bit_generator.state = state[name]


class StepObserver(Protocol):
    """Hook called after each child is evaluated, before training and insertion."""

    def on_step(self, engine: "OnlineEvolution", outcome: StrategyOutcome, candidate: Candidate) -> None:
        ...


@dataclass
class OnlineResult:
    """Everything a finished run produced."""
    config: ExperimentConfig
    task: SymRegTask
    records: List[RunRecord]
    population: PopulationBuffer
    best: Candidate
    stats: EvaluationStats
    training_reports: List[TrainingReport] = field(default_factory=list)
    model: Optional[PredictorModel] = None

    @property
    def hill_climb_rate(self) -> float:
        children = [r for r in self.records if r.phase == PHASE_CHILD]
        return children[-1].cumulative_hill_climb_rate if children else 0.0

    @property
    def mean_attempts(self) -> float:
        children = [r.attempts_used for r in self.records if r.phase == PHASE_CHILD]
        return float(np.mean(children)) if children else 0.0


def _candidate_to_state(c: Candidate) -> Dict[str, Any]:
    return {
        "graph": serialize(c.graph),
        "fitness": c.fitness,
        "rmse": c.rmse,
        "parent_fitness": c.parent_fitness,
        "sample_index": c.sample_index,
        "attempts_used": c.attempts_used,
        "fec_hit": c.fec_hit,
        "accepted_by_model": c.accepted_by_model,
        "predictor_queries": c.predictor_queries,
    }


def _candidate_from_state(data: Dict[str, Any], max_slots: int) -> Candidate:
    values = dict(data)
    values["graph"] = deserialize(values["graph"], max_slots)
    return Candidate(**values)


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class OnlineEvolution(LoggerMixin):
    """
    Single-process online training loop.

    Per sample: pick vanilla or the predictor strategy, produce and evaluate
    a child, train every ``schedule.frequency`` samples, then append the
    child to the replay buffer and the population.
    """

    def __init__(self, config: ExperimentConfig, observer: Optional[StepObserver] = None):
        self.config = config
        self.observer = observer
        self.task = make_task(config.task, config.seed)
        self.streams = RunStreams(config.seed)
        self.fec = FecCache() if config.fec else None
        self.stats = EvaluationStats()
        self.replay = ReplayBuffer(config.replay_capacity)
        self.records: List[RunRecord] = []
        self.training_reports: List[TrainingReport] = []
        self.samples = 0
        self.improvements = 0
        self.best_fitness = -np.inf
        self.best: Optional[Candidate] = None
        self.population: Optional[PopulationBuffer] = None

        self.handle: Optional[PredictorHandle] = None
        self.opt_state: Optional[AdamState] = None
        self.scorer = self._build_scorer()

    @property
    def learned(self) -> bool:
        return self.config.predictor.mode is PredictorMode.LEARNED

    def _build_scorer(self) -> PairwiseScorer:
        if self.learned:
            model = PredictorModel.initialize(
                self.config.encoder, self.streams["predictor_init"], HeadKind.BINARY
            )
            self.handle = PredictorHandle(model)
            self.opt_state = AdamState.zeros(model.num_params)
            return LearnedScorer(self.handle)
        return NoisyOracle(
            fitness_lookup(self.task), self.config.predictor.oracle_accuracy, self.streams["oracle"]
        )

    @property
    def model(self) -> Optional[PredictorModel]:
        return self.handle.snapshot() if self.handle is not None else None

    def _record(self, candidate: Candidate, phase: str, strategy: str) -> None:
        if self.best is None or candidate.fitness > self.best.fitness:
            self.best = candidate
        self.best_fitness = max(self.best_fitness, candidate.fitness)
        rate = None
        if phase == PHASE_CHILD:
            rate = self.improvements / self.samples
        self.records.append(RunRecord(
            phase=phase,
            sample_index=candidate.sample_index,
            strategy=strategy,
            child_fitness=candidate.fitness,
            parent_fitness=candidate.parent_fitness,
            best_fitness=self.best_fitness,
            attempts_used=candidate.attempts_used,
            accepted_by_model=candidate.accepted_by_model,
            predictor_queries=candidate.predictor_queries,
            fec_hit=candidate.fec_hit,
            cumulative_hill_climb_rate=rate,
            structural_hash=format_hash(structural_hash(candidate.graph)),
        ))

    def initialize(self) -> None:
        self.population = init_population(
            self.task,
            self.config.population_size,
            self.streams["evolution"],
            self.fec,
            self.stats,
            self.config.max_slots,
        )
        for member in self.population:
            self.replay.add(member.graph, member.fitness)
            self._record(member, PHASE_INIT, INIT_STRATEGY)
        self.logger.info(
            "population_initialized",
            size=len(self.population),
            best_fitness=self.best_fitness,
        )

    def train(self) -> TrainingReport:
        """Run one training trigger on the current replay contents and publish the result."""
        if self.handle is None or self.opt_state is None:
            raise ConfigurationError("training needs the learned predictor mode")
        schedule = self.config.schedule
        model, self.opt_state, report = train_predictor(
            self.handle.snapshot(),
            self.opt_state,
            self.replay.records(),
            schedule.epochs_per_trigger,
            schedule.batch_size,
            self.config.optimizer,
            self.streams["training"],
        )
        self.handle.publish(model)
        self.training_reports.append(report)
        self.logger.info(
            "training_triggered",
            samples=self.samples,
            records=len(self.replay),
            pairs=report.examples,
            steps=report.steps,
            skipped_steps=report.skipped_steps,
            mean_loss=report.mean_loss,
        )
        return report

    def step(self) -> Candidate:
        population, _ = self._initialized()
        kind = select_strategy(
            self.config.strategy, self.samples, self.config.schedule.min_data, self.streams["gate"]
        )
        strategy = build_strategy(
            kind, self.config.strategy, self.config.tournament_size, self.scorer
        )
        outcome = strategy(population, self.streams["evolution"])
        candidate = evaluate_outcome(outcome, self.task, self.samples + 1, self.fec, self.stats)

        if self.observer is not None:
            self.observer.on_step(self, outcome, candidate)
        if self.learned and self.samples % self.config.schedule.frequency == 0:
            self.train()

        self.replay.add(candidate.graph, candidate.fitness)
        population.add(candidate)
        self.samples += 1
        if candidate.improved:
            self.improvements += 1
        self._record(candidate, PHASE_CHILD, kind.value)
        self.logger.debug(
            "sample_evaluated",
            sample=self.samples,
            strategy=kind.value,
            fitness=candidate.fitness,
            attempts=candidate.attempts_used,
        )
        return candidate

    def run(self, checkpoint_dir: Optional[Path] = None) -> OnlineResult:
        """Run (or continue) until the sample budget is spent."""
        if self.population is None:
            self.initialize()
        self.logger.info(
            "experiment_started",
            task=self.config.task.value,
            strategy=self.config.strategy.kind.value,
            predictor=self.config.predictor.mode.value,
            seed=self.config.seed,
            samples=self.config.samples,
            config_digest=self.config.digest(),
            resumed_at=self.samples,
        )
        every = self.config.checkpoint_every
        while self.samples < self.config.samples:
            self.step()
            if checkpoint_dir is not None and every and self.samples % every == 0:
                self.save_checkpoint(checkpoint_dir)
        result = self.result()
        self.logger.info(
            "experiment_finished",
            best_fitness=result.best.fitness,
            evaluations=self.stats.evaluations,
            fec_hits=self.stats.fec_hits,
            hill_climb_rate=result.hill_climb_rate,
        )
        return result

    def _initialized(self) -> Tuple[PopulationBuffer, Candidate]:
        if self.population is None or self.best is None:
            raise EvolutionError("initialize() must run first", {"samples": self.samples})
        return self.population, self.best

    def result(self) -> OnlineResult:
        population, best = self._initialized()
        return OnlineResult(
            config=self.config,
            task=self.task,
            records=list(self.records),
            population=population,
            best=best,
            stats=self.stats,
            training_reports=list(self.training_reports),
            model=self.model,
        )

    # Checkpointing

    def state_dict(self) -> Dict[str, Any]:
        population, best = self._initialized()
        return {
            "schema": STATE_SCHEMA,
            "config_digest": self.config.digest(),
            "seed": self.config.seed,
            "samples": self.samples,
            "improvements": self.improvements,
            "best_fitness": self.best_fitness,
            "best": _candidate_to_state(best),
            "population": [_candidate_to_state(c) for c in population],
            "replay": [[serialize(r.graph), r.fitness] for r in self.replay],
            "fec": self.fec.to_state() if self.fec is not None else None,
            "stats": {"evaluations": self.stats.evaluations, "fec_hits": self.stats.fec_hits},
            "rng": self.streams.state(),
            "records": [r.to_dict() for r in self.records],
            "training_reports": [r.to_dict() for r in self.training_reports],
        }

    def save_checkpoint(self, directory: Path) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        _atomic_write(directory / "state.json", json.dumps(self.state_dict()).encode("utf-8"))
        if self.handle is not None and self.opt_state is not None:
            _atomic_write(directory / "model.bin", model_to_bytes(self.handle.snapshot()))
            buffer = io.BytesIO()
            np.savez(buffer, m=self.opt_state.m, v=self.opt_state.v, step=np.array(self.opt_state.step))
            _atomic_write(directory / "optimizer.npz", buffer.getvalue())
        self.logger.info("checkpoint_written", samples=self.samples, path=str(directory))

    @classmethod
    def resume(
        cls, config: ExperimentConfig, directory: Path, observer: Optional[StepObserver] = None
    ) -> "OnlineEvolution":
        """
        Rebuild an engine from a checkpoint directory.

        Raises:
            CheckpointError: If the checkpoint is missing, corrupt or was
                written for a different configuration
        """
        state_path = directory / "state.json"
        if not state_path.exists():
            raise CheckpointError(f"no run checkpoint in {directory}")
        try:
            state = json.loads(state_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise CheckpointError("run checkpoint is corrupt", {"error": str(e)})
        if state.get("schema") != STATE_SCHEMA:
            raise CheckpointError(f"unsupported run checkpoint schema {state.get('schema')!r}")
        if state["config_digest"] != config.digest() or state["seed"] != config.seed:
            raise CheckpointError(
                "checkpoint was written for a different configuration",
                {"checkpoint": state["config_digest"], "config": config.digest()},
            )

        engine = cls(config, observer)
        slots = config.max_slots
        engine.samples = int(state["samples"])
        engine.improvements = int(state["improvements"])
        engine.best_fitness = float(state["best_fitness"])
        engine.best = _candidate_from_state(state["best"], slots)
        engine.population = PopulationBuffer(config.population_size)
        for data in state["population"]:
            engine.population.add(_candidate_from_state(data, slots))
        engine.replay.extend(ReplayRecord(deserialize(text, slots), float(f)) for text, f in state["replay"])
        if state["fec"] is not None:
            engine.fec = FecCache.from_state(state["fec"])
        engine.stats = EvaluationStats(**state["stats"])
        engine.streams.restore(state["rng"])
        engine.records = [RunRecord.from_dict(r) for r in state["records"]]
        engine.training_reports = [TrainingReport(**r) for r in state["training_reports"]]

        if engine.handle is not None:
            engine.handle.publish(model_from_bytes((directory / "model.bin").read_bytes()))
            with np.load(directory / "optimizer.npz") as moments:
                engine.opt_state = AdamState(moments["m"], moments["v"], int(moments["step"]))
        engine.logger.info("checkpoint_resumed", samples=engine.samples, path=str(directory))
        return engine


def online_loop(
    config: ExperimentConfig,
    observer: Optional[StepObserver] = None,
    checkpoint_dir: Optional[Path] = None,
) -> OnlineResult:
    """Run one online-evolution experiment from scratch."""
    return OnlineEvolution(config, observer).run(checkpoint_dir)
