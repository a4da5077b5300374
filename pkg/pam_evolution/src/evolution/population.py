"""
Candidates, the aging population queue and tournament selection.
"""
import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Deque, Iterator, Optional

import numpy as np

from ..dag.graph import ProgramGraph
from ..exceptions import EmptyPopulationError, EvolutionError


@dataclass(frozen=True)
class Candidate:
    """
    An evaluated program plus bookkeeping.

    Candidates are frozen: fitness is fixed when the candidate is created,
    before it ever enters a population.
    """
    graph: ProgramGraph
    fitness: float
    rmse: float = math.nan
    parent_fitness: Optional[float] = None
    sample_index: int = 0
    attempts_used: int = 0
    fec_hit: bool = False
    accepted_by_model: bool = False
    predictor_queries: int = 0

    @property
    def improved(self) -> bool:
        """Strict improvement over the parent; initial members never count."""
        return self.parent_fitness is not None and self.fitness > self.parent_fitness

    def with_bookkeeping(self, **changes) -> "Candidate":
        return replace(self, **changes)


class PopulationBuffer:
    """
    Bounded FIFO of candidates; adding to a full buffer evicts the oldest.
    Index 0 is the oldest member.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise EvolutionError(f"population capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._queue: Deque[Candidate] = deque(maxlen=capacity)

    def add(self, candidate: Candidate) -> Optional[Candidate]:
        """Append ``candidate``; returns the evicted member, if any."""
        evicted = self._queue[0] if self.is_full else None
        self._queue.append(candidate)
        return evicted

    @property
    def is_full(self) -> bool:
        return len(self._queue) == self.capacity

    def __len__(self) -> int:
        return len(self._queue)

    def __iter__(self) -> Iterator[Candidate]:
        return iter(self._queue)

    def __getitem__(self, index: int) -> Candidate:
        return self._queue[index]

    def fitnesses(self) -> np.ndarray:
        return np.fromiter((c.fitness for c in self._queue), dtype=np.float64, count=len(self._queue))

    def best(self) -> Candidate:
        if not self._queue:
            raise EmptyPopulationError("population is empty")
        return max(reversed(self._queue), key=lambda c: c.fitness)


def tournament_select(pop: PopulationBuffer, tournament_size: int, rng: np.random.Generator) -> Candidate:
    """
    Draw ``tournament_size`` members uniformly with replacement and return
    the fittest; ties go to the most recently inserted.

    Raises:
        EmptyPopulationError: If the population is empty
    """
    if len(pop) == 0:
        raise EmptyPopulationError("cannot run a tournament on an empty population")
    if tournament_size < 1:
        raise EvolutionError(f"tournament size must be positive, got {tournament_size}")
    drawn = rng.integers(len(pop), size=tournament_size)
    winner = max(drawn, key=lambda i: (pop[int(i)].fitness, int(i)))
    return pop[int(winner)]
