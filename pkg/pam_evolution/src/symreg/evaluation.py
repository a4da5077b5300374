"""
Program evaluation and flip-and-squash fitness.
"""
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from ..dag.graph import NodeOp, ProgramGraph, active_slots
from ..dag.hashing import canonical_outputs
from ..exceptions import TaskError
from .tasks import SymRegTask

_UNARY = {
    NodeOp.SIN: np.sin,
    NodeOp.COS: np.cos,
    NodeOp.EXP: np.exp,
    NodeOp.LOG: np.log,
}
_BINARY = {
    NodeOp.ADD: np.add,
    NodeOp.SUB: np.subtract,
    NodeOp.MUL: np.multiply,
    NodeOp.DIV: np.divide,
}


@dataclass(frozen=True)
class FitnessRecord:
    """RMSE against the target and the fitness derived from it."""
    rmse: float
    fitness: float


def evaluate_outputs(g: ProgramGraph, columns: Sequence[np.ndarray]) -> np.ndarray:
    """
    Evaluate the active subgraph over many points at once.

    Args:
        g: Program graph
        columns: One array per input variable, all the same length

    Returns:
        Output vector; points where any active node went non-finite hold NaN
    """
    if len(columns) != g.num_inputs:
        raise TaskError(f"graph takes {g.num_inputs} inputs, got {len(columns)} columns")

    values: Dict[int, np.ndarray] = {}
    with np.errstate(all="ignore"):
        for slot in active_slots(g):
            node = g.nodes[slot]
            if node.op.is_input:
                result = np.asarray(columns[slot], dtype=np.float64)
            elif node.op in _UNARY:
                result = _UNARY[node.op](values[node.inputs[0]])
            else:
                result = _BINARY[node.op](values[node.inputs[0]], values[node.inputs[1]])
            values[slot] = np.where(np.isfinite(result), result, np.nan)
    return values[g.output_slot]


def evaluate_graph(g: ProgramGraph, point: Sequence[float]) -> float:
    """
    Evaluate a graph at a single point.

    Raises:
        TaskError: If the point arity does not match the graph
    """
    if len(point) != g.num_inputs:
        raise TaskError(f"graph takes {g.num_inputs} inputs, got point of length {len(point)}")
    columns = tuple(np.array([float(v)]) for v in point)
    return float(evaluate_outputs(g, columns)[0])


def squash(value: float) -> float:
    """Map [0, inf) onto [0, 1): (2/pi) * arctan(value * pi / 2)."""
    return (2.0 / math.pi) * math.atan(value * math.pi / 2.0)


def fitness_from_rmse(rmse: float) -> float:
    """Flip-and-squash: 1 - squash(rmse), or 0 for a non-finite rmse."""
    if not math.isfinite(rmse):
        return 0.0
    return 1.0 - squash(rmse)


def rmse_of(outputs: np.ndarray, targets: np.ndarray) -> float:
    with np.errstate(all="ignore"):
        return float(np.sqrt(np.mean((outputs - targets) ** 2)))


def fitness_from_outputs(outputs: np.ndarray, task: SymRegTask) -> FitnessRecord:
    """
    Fitness of an output vector. Both sides are taken in canonical rounded
    form, so outputs sharing a functional hash share a fitness bit for bit.
    """
    rmse = rmse_of(canonical_outputs(outputs), canonical_outputs(task.targets))
    return FitnessRecord(rmse=rmse, fitness=fitness_from_rmse(rmse))


def fitness(g: ProgramGraph, task: SymRegTask) -> FitnessRecord:
    """RMSE over the task's sample points and the flip-and-squash fitness."""
    return fitness_from_outputs(evaluate_outputs(g, task.columns), task)


def evaluate_with_outputs(g: ProgramGraph, task: SymRegTask) -> Tuple[np.ndarray, FitnessRecord]:
    """Output vector plus fitness, for callers that also hash the outputs."""
    outputs = evaluate_outputs(g, task.columns)
    return outputs, fitness_from_outputs(outputs, task)
