"""
Evaluation pipeline with functional-equivalence caching.
"""
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from ..dag.graph import ProgramGraph
from ..dag.hashing import functional_hash
from ..symreg.evaluation import FitnessRecord, evaluate_outputs, fitness_from_outputs
from ..symreg.tasks import SymRegTask
from .population import Candidate


class FecCache:
    """Functional hash -> fitness record, with hit and miss counters."""

    def __init__(self) -> None:
        self._table: Dict[int, FitnessRecord] = {}
        self.hits = 0
        self.misses = 0

    def lookup(self, key: int) -> Optional[FitnessRecord]:
        record = self._table.get(key)
        if record is None:
            self.misses += 1
        else:
            self.hits += 1
        return record

    def store(self, key: int, record: FitnessRecord) -> None:
        self._table.setdefault(key, record)

    def __len__(self) -> int:
        return len(self._table)

    def __contains__(self, key: int) -> bool:
        return key in self._table

    def to_state(self) -> Dict[str, object]:
        return {
            "hits": self.hits,
            "misses": self.misses,
            "table": [[f"{k:016x}", r.rmse, r.fitness] for k, r in self._table.items()],
        }

    @classmethod
    def from_state(cls, state: Dict[str, object]) -> "FecCache":
        cache = cls()
        cache.hits = int(state["hits"])
        cache.misses = int(state["misses"])
        for key, rmse, fitness in state["table"]:
            cache._table[int(key, 16)] = FitnessRecord(float(rmse), float(fitness))
        return cache


@dataclass
class EvaluationStats:
    """Fitness computations versus cache hits; they sum to every evaluate call."""
    evaluations: int = 0
    fec_hits: int = 0

    @property
    def total(self) -> int:
        return self.evaluations + self.fec_hits


def evaluate_record(
    child: ProgramGraph, task: SymRegTask, fec: Optional[FecCache] = None
) -> Tuple[FitnessRecord, bool]:
    """Fitness record and whether it came from the cache."""
    outputs = evaluate_outputs(child, task.columns)
    if fec is None:
        return fitness_from_outputs(outputs, task), False
    key = functional_hash(outputs)
    cached = fec.lookup(key)
    if cached is not None:
        return cached, True
    record = fitness_from_outputs(outputs, task)
    fec.store(key, record)
    return record, False


def evaluate(
    child: ProgramGraph,
    task: SymRegTask,
    fec: Optional[FecCache] = None,
    stats: Optional[EvaluationStats] = None,
) -> Candidate:
    """
    Evaluate ``child``. With a cache, a functional duplicate reuses the
    stored fitness and is flagged as a hit.
    """
    record, hit = evaluate_record(child, task, fec)
    if stats is not None:
        if hit:
            stats.fec_hits += 1
        else:
            stats.evaluations += 1
    return Candidate(graph=child, fitness=record.fitness, rmse=record.rmse, fec_hit=hit)
