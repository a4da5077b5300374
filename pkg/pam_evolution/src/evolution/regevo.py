"""
Regularized evolution: initialization and the select-mutate-evaluate-age cycle.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING, Callable, List, Optional

import numpy as np

from ..dag.graph import DEFAULT_MAX_SLOTS, ProgramGraph
from ..symreg.operators import random_graph
from ..symreg.tasks import SymRegTask
from .fec import EvaluationStats, FecCache, evaluate, evaluate_record
from .population import Candidate, PopulationBuffer

if TYPE_CHECKING:
    from ..strategies.strategies import StrategyOutcome

MutationStrategy = Callable[[PopulationBuffer, np.random.Generator], "StrategyOutcome"]


def init_population(
    task: SymRegTask,
    population_size: int,
    rng: np.random.Generator,
    fec: Optional[FecCache] = None,
    stats: Optional[EvaluationStats] = None,
    max_slots: int = DEFAULT_MAX_SLOTS,
    workers: int = 1,
) -> PopulationBuffer:
    """
    Generate and evaluate ``population_size`` random graphs.

    Graphs are drawn sequentially from ``rng``; without a cache the
    evaluations may fan out to ``workers`` threads, and results are inserted
    in generation order either way.
    """
    graphs = [random_graph(task, rng, max_slots) for _ in range(population_size)]
    if fec is None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            candidates = list(pool.map(lambda g: evaluate(g, task), graphs))
        if stats is not None:
            stats.evaluations += len(candidates)
    else:
        candidates = [evaluate(g, task, fec, stats) for g in graphs]

    pop = PopulationBuffer(population_size)
    for candidate in candidates:
        pop.add(candidate)
    return pop


def evaluate_outcome(
    outcome: "StrategyOutcome",
    task: SymRegTask,
    sample_index: int,
    fec: Optional[FecCache] = None,
    stats: Optional[EvaluationStats] = None,
) -> Candidate:
    """Evaluate a strategy's child and attach the step's bookkeeping."""
    child = evaluate(outcome.child, task, fec, stats)
    return child.with_bookkeeping(
        parent_fitness=outcome.parent_fitness,
        sample_index=sample_index,
        attempts_used=outcome.attempts_used,
        accepted_by_model=outcome.accepted_by_model,
        predictor_queries=outcome.predictor_queries,
    )


def regevo_step(
    pop: PopulationBuffer,
    task: SymRegTask,
    strategy: MutationStrategy,
    rng: np.random.Generator,
    sample_index: int,
    fec: Optional[FecCache] = None,
    stats: Optional[EvaluationStats] = None,
) -> Candidate:
    """
    One full cycle: the strategy proposes a child, the child is evaluated,
    appended, and the oldest member is evicted.
    """
    outcome = strategy(pop, rng)
    candidate = evaluate_outcome(outcome, task, sample_index, fec, stats)
    pop.add(candidate)
    return candidate


def fitness_lookup(task: SymRegTask) -> Callable[[ProgramGraph], float]:
    """True fitness of a graph without touching any cache counters."""

    def lookup(g: ProgramGraph) -> float:
        record, _ = evaluate_record(g, task)
        return record.fitness

    return lookup


def best_so_far(candidates: List[Candidate]) -> List[float]:
    best = -np.inf
    series = []
    for candidate in candidates:
        best = max(best, candidate.fitness)
        series.append(best)
    return series
