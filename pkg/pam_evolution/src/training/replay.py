"""
Replay buffer and training-pair construction.
"""
from collections import deque
from dataclasses import dataclass
from typing import Deque, Iterable, Iterator, List

import numpy as np

from ..dag.graph import ProgramGraph
from ..exceptions import EvolutionError
from ..predictor.model import LabeledGraph, LabeledPair


@dataclass(frozen=True)
class ReplayRecord:
    graph: ProgramGraph
    fitness: float


class ReplayBuffer:
    """Bounded FIFO of evaluated (graph, fitness) records."""

    def __init__(self, capacity: int):
        if capacity < 2:
            raise EvolutionError(f"replay capacity must be at least 2, got {capacity}")
        self.capacity = capacity
        self._records: Deque[ReplayRecord] = deque(maxlen=capacity)

    def add(self, graph: ProgramGraph, fitness: float) -> None:
        self._records.append(ReplayRecord(graph, fitness))

    def extend(self, records: Iterable[ReplayRecord]) -> None:
        self._records.extend(records)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[ReplayRecord]:
        return iter(self._records)

    def records(self) -> List[ReplayRecord]:
        return list(self._records)


def make_epoch_pairs(records: List[ReplayRecord], rng: np.random.Generator) -> List[LabeledPair]:
    """
    Zip two independent shuffles of ``records`` into pairs.

    Pairs of identical graphs or exactly equal fitness are dropped; the label
    is 1 when the first record is fitter. An all-tied buffer yields no pairs.
    """
    n = len(records)
    if n < 2:
        return []
    first, second = rng.permutation(n), rng.permutation(n)
    pairs = []
    for i, j in zip(first, second):
        a, b = records[int(i)], records[int(j)]
        if a.fitness == b.fitness or a.graph == b.graph:
            continue
        pairs.append(LabeledPair(a.graph, b.graph, 1.0 if a.fitness > b.fitness else 0.0))
    return pairs


def make_epoch_examples(records: List[ReplayRecord], rng: np.random.Generator) -> List[LabeledGraph]:
    """One shuffled pass over ``records`` for the regression head."""
    return [LabeledGraph(records[int(i)].graph, records[int(i)].fitness) for i in rng.permutation(len(records))]
