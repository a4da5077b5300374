"""
Distinct-candidate counts from a run log's structural hashes.
"""
import csv
import io
from collections import Counter, deque
from dataclasses import dataclass
from typing import Deque, List, Sequence

from ..training.run_log import PHASE_INIT, RunRecord


@dataclass(frozen=True)
class UniquenessPoint:
    sample_index: int
    unique_in_population: int
    cumulative_unique: int


def uniqueness_curves(records: Sequence[RunRecord], population_size: int) -> List[UniquenessPoint]:
    """
    Distinct structural hashes in the population window and over every
    evaluated candidate so far.

    One point is emitted once the initial population is in place (sample
    index 0) and one after every child.
    """
    window: Deque[str] = deque()
    in_window: Counter = Counter()
    seen = set()
    points: List[UniquenessPoint] = []
    init_count = sum(1 for r in records if r.phase == PHASE_INIT)

    for i, record in enumerate(records):
        window.append(record.structural_hash)
        in_window[record.structural_hash] += 1
        if len(window) > population_size:
            evicted = window.popleft()
            in_window[evicted] -= 1
            if in_window[evicted] == 0:
                del in_window[evicted]
        seen.add(record.structural_hash)
        if record.phase == PHASE_INIT and i + 1 < init_count:
            continue
        points.append(UniquenessPoint(record.sample_index, len(in_window), len(seen)))
    return points


def uniqueness_csv(points: List[UniquenessPoint]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["sample_index", "unique_in_population", "cumulative_unique"])
    for p in points:
        writer.writerow([p.sample_index, p.unique_in_population, p.cumulative_unique])
    return buffer.getvalue()
