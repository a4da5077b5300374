"""
Fixed-slot DAG representation of candidate programs.

A graph is an ordered list of slots. Input slots come first; every operator
slot reads only from strictly earlier slots, so any graph built from valid
slots is acyclic by construction. Slots unreachable from the output are kept
as neutral material for later mutations.
"""
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterable, List, Tuple

from ..exceptions import InvalidGraphError

DEFAULT_MAX_SLOTS = 15


class NodeOp(Enum):
    """Node operation kinds."""
    INPUT_X = "INPUT_X"
    INPUT_Y = "INPUT_Y"
    ADD = "ADD"
    SUB = "SUB"
    MUL = "MUL"
    DIV = "DIV"
    SIN = "SIN"
    COS = "COS"
    EXP = "EXP"
    LOG = "LOG"

    @property
    def arity(self) -> int:
        return _ARITY[self]

    @property
    def is_input(self) -> bool:
        return self in (NodeOp.INPUT_X, NodeOp.INPUT_Y)

    @property
    def index(self) -> int:
        """Stable integer id, used for embedding lookups."""
        return _INDEX[self]


_ARITY = {
    NodeOp.INPUT_X: 0,
    NodeOp.INPUT_Y: 0,
    NodeOp.ADD: 2,
    NodeOp.SUB: 2,
    NodeOp.MUL: 2,
    NodeOp.DIV: 2,
    NodeOp.SIN: 1,
    NodeOp.COS: 1,
    NodeOp.EXP: 1,
    NodeOp.LOG: 1,
}
_INDEX = {op: i for i, op in enumerate(NodeOp)}

OPERATORS: Tuple[NodeOp, ...] = tuple(op for op in NodeOp if not op.is_input)
NUM_OP_KINDS = len(NodeOp)
INPUT_OPS: Tuple[NodeOp, ...] = (NodeOp.INPUT_X, NodeOp.INPUT_Y)


@dataclass(frozen=True)
class Node:
    """One slot of a program graph."""
    op: NodeOp
    inputs: Tuple[int, ...] = ()


@dataclass(frozen=True)
class ProgramGraph:
    """
    Immutable fixed-slot DAG.

    Attributes:
        nodes: Slots in index order
        num_inputs: 1 (x) or 2 (x, y)
        output_slot: Slot whose value is the program output
        max_slots: Slot capacity
    """
    nodes: Tuple[Node, ...]
    num_inputs: int
    output_slot: int
    max_slots: int = DEFAULT_MAX_SLOTS

    def __post_init__(self) -> None:
        validate_graph(self)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def op_slots(self) -> range:
        """Indices of non-input slots."""
        return range(self.num_inputs, len(self.nodes))

    def replace_node(self, slot: int, node: Node) -> "ProgramGraph":
        nodes = list(self.nodes)
        nodes[slot] = node
        return ProgramGraph(tuple(nodes), self.num_inputs, self.output_slot, self.max_slots)

    def with_output(self, slot: int) -> "ProgramGraph":
        return ProgramGraph(self.nodes, self.num_inputs, slot, self.max_slots)


def validate_graph(g: ProgramGraph) -> None:
    """
    Check every ProgramGraph invariant.

    Raises:
        InvalidGraphError: On the first violated invariant
    """
    if g.num_inputs not in (1, 2):
        raise InvalidGraphError(f"num_inputs must be 1 or 2, got {g.num_inputs}")
    if len(g.nodes) > g.max_slots:
        raise InvalidGraphError(
            "graph exceeds slot capacity", {"slots": len(g.nodes), "max_slots": g.max_slots}
        )
    if len(g.nodes) < g.num_inputs:
        raise InvalidGraphError("graph is missing input slots", {"slots": len(g.nodes)})

    for slot, node in enumerate(g.nodes):
        if slot < g.num_inputs:
            if node.op is not INPUT_OPS[slot] or node.inputs:
                raise InvalidGraphError(
                    f"slot {slot} must be {INPUT_OPS[slot].value} with no inputs",
                    {"slot": slot, "op": node.op.value},
                )
            continue
        if node.op.is_input:
            raise InvalidGraphError(f"input op {node.op.value} in operator slot {slot}")
        if len(node.inputs) != node.op.arity:
            raise InvalidGraphError(
                f"slot {slot} op {node.op.value} expects {node.op.arity} inputs",
                {"inputs": node.inputs},
            )
        for source in node.inputs:
            if not 0 <= source < slot:
                raise InvalidGraphError(
                    f"slot {slot} reads from slot {source}; edges must point to earlier slots",
                    {"slot": slot, "source": source},
                )

    if not 0 <= g.output_slot < len(g.nodes):
        raise InvalidGraphError(
            "output slot out of range", {"output_slot": g.output_slot, "slots": len(g.nodes)}
        )


def active_subgraph(g: ProgramGraph) -> FrozenSet[int]:
    """Slots reachable by reverse traversal from the output slot, inclusive."""
    seen = {g.output_slot}
    stack = [g.output_slot]
    while stack:
        slot = stack.pop()
        for source in g.nodes[slot].inputs:
            if source not in seen:
                seen.add(source)
                stack.append(source)
    return frozenset(seen)


def active_slots(g: ProgramGraph) -> List[int]:
    """Active slots in index (evaluation) order."""
    return sorted(active_subgraph(g))


def build_graph(
    ops: Iterable[Tuple[NodeOp, Tuple[int, ...]]],
    num_inputs: int = 1,
    output_slot: int = -1,
    max_slots: int = DEFAULT_MAX_SLOTS,
) -> ProgramGraph:
    """
    Convenience constructor: input slots are added automatically.

    Args:
        ops: (op, inputs) for each operator slot, in slot order
        num_inputs: Number of input slots placed before ``ops``
        output_slot: Output slot; negative values count from the end
        max_slots: Slot capacity
    """
    nodes = [Node(op) for op in INPUT_OPS[:num_inputs]]
    nodes.extend(Node(op, tuple(inputs)) for op, inputs in ops)
    if output_slot < 0:
        output_slot = len(nodes) + output_slot
    return ProgramGraph(tuple(nodes), num_inputs, output_slot, max_slots)
