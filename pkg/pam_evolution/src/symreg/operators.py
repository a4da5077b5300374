"""
Random program generation and the vanilla mutator.
"""
from enum import Enum
from typing import Optional

import numpy as np

from ..dag.graph import DEFAULT_MAX_SLOTS, INPUT_OPS, OPERATORS, Node, ProgramGraph
from .tasks import SymRegTask

MAX_MOVE_RESAMPLES = 16


class MutationMove(Enum):
    """Single-edit mutation moves."""
    OP_RESAMPLE = "op_resample"
    EDGE_REWIRE = "edge_rewire"
    OUTPUT_MOVE = "output_move"


_MOVES = tuple(MutationMove)


def random_graph(
    task: SymRegTask, rng: np.random.Generator, max_slots: int = DEFAULT_MAX_SLOTS
) -> ProgramGraph:
    """
    Fill every operator slot with a uniform op reading from uniform earlier slots.
    The output is the last slot.
    """
    nodes = [Node(op) for op in INPUT_OPS[: task.num_inputs]]
    for slot in range(task.num_inputs, max_slots):
        op = OPERATORS[int(rng.integers(len(OPERATORS)))]
        inputs = tuple(int(rng.integers(slot)) for _ in range(op.arity))
        nodes.append(Node(op, inputs))
    return ProgramGraph(tuple(nodes), task.num_inputs, max_slots - 1, max_slots)


def _op_resample(g: ProgramGraph, rng: np.random.Generator) -> ProgramGraph:
    slot = g.num_inputs + int(rng.integers(len(g) - g.num_inputs))
    node = g.nodes[slot]
    choices = [op for op in OPERATORS if op is not node.op]
    op = choices[int(rng.integers(len(choices)))]
    inputs = list(node.inputs[: op.arity])
    while len(inputs) < op.arity:
        inputs.append(int(rng.integers(slot)))
    return g.replace_node(slot, Node(op, tuple(inputs)))


def _edge_rewire(g: ProgramGraph, rng: np.random.Generator) -> Optional[ProgramGraph]:
    slot = g.num_inputs + int(rng.integers(len(g) - g.num_inputs))
    node = g.nodes[slot]
    position = int(rng.integers(node.op.arity))
    current = node.inputs[position]
    if slot < 2:
        return None  # only one earlier slot, and the edge already points at it
    source = int(rng.integers(slot - 1))
    if source >= current:
        source += 1
    inputs = list(node.inputs)
    inputs[position] = source
    return g.replace_node(slot, Node(node.op, tuple(inputs)))


def _output_move(g: ProgramGraph, rng: np.random.Generator) -> Optional[ProgramGraph]:
    if len(g) < 2:
        return None
    slot = int(rng.integers(len(g) - 1))
    if slot >= g.output_slot:
        slot += 1
    return g.with_output(slot)


def apply_move(g: ProgramGraph, move: MutationMove, rng: np.random.Generator) -> ProgramGraph:
    """
    Apply one mutation move, resampling degenerate draws.

    A move with no legal alternative is redrawn up to ``MAX_MOVE_RESAMPLES``
    times before falling back to an op resample. A graph made only of input
    slots can at most move its output; with a single input it is returned as is.
    """
    if len(g) == g.num_inputs:
        moved = _output_move(g, rng)
        return g if moved is None else moved
    if move is MutationMove.OP_RESAMPLE:
        return _op_resample(g, rng)
    mover = _edge_rewire if move is MutationMove.EDGE_REWIRE else _output_move
    for _ in range(MAX_MOVE_RESAMPLES):
        child = mover(g, rng)
        if child is not None:
            return child
    return _op_resample(g, rng)


def mutate_graph(g: ProgramGraph, rng: np.random.Generator) -> ProgramGraph:
    """Return a child produced by exactly one uniformly chosen move; ``g`` is untouched."""
    move = _MOVES[int(rng.integers(len(_MOVES)))]
    return apply_move(g, move, rng)
