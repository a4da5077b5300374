"""
Line-oriented text format for program graphs.

One node per line, ``<slot_index> <OP_NAME> [<in0> [<in1>]]``, terminated by
``OUT <output_slot>``. A graph whose capacity differs from the default is
prefixed with a ``SLOTS <max_slots>`` line.
"""
from typing import List, Sequence, Tuple

from ..exceptions import GraphFormatError, InvalidGraphError
from .graph import DEFAULT_MAX_SLOTS, INPUT_OPS, Node, NodeOp, ProgramGraph


def serialize(g: ProgramGraph) -> str:
    """Render a graph in the text format (trailing newline included)."""
    lines = [] if g.max_slots == DEFAULT_MAX_SLOTS else [f"SLOTS {g.max_slots}"]
    for slot, node in enumerate(g.nodes):
        fields = [str(slot), node.op.value] + [str(i) for i in node.inputs]
        lines.append(" ".join(fields))
    lines.append(f"OUT {g.output_slot}")
    return "\n".join(lines) + "\n"


def _parse_int(token: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphFormatError(
            "malformed", f"line {line_no}: expected an integer, got {token!r}", {"line": line_no}
        )


def deserialize(text: str, max_slots: int = DEFAULT_MAX_SLOTS) -> ProgramGraph:
    """
    Parse a graph record. A ``SLOTS`` header overrides ``max_slots``; without
    one the capacity is ``max_slots``, widened to fit the record.

    Raises:
        GraphFormatError: ``reason`` is one of unknown_op, arity_mismatch,
            forward_edge, output_out_of_range or malformed
    """
    lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
    if not lines or not lines[-1].startswith("OUT"):
        raise GraphFormatError("malformed", "record must end with an 'OUT <slot>' line")
    declared = lines[0].startswith("SLOTS")
    if declared:
        header = lines.pop(0).split()
        if len(header) != 2:
            raise GraphFormatError("malformed", "SLOTS line must be 'SLOTS <max_slots>'")
        max_slots = _parse_int(header[1], 0)

    nodes: List[Node] = []
    for line_no, line in enumerate(lines[:-1], start=1):
        tokens = line.split()
        if len(tokens) < 2:
            raise GraphFormatError("malformed", f"line {line_no}: expected '<slot> <OP> [inputs]'")
        slot = _parse_int(tokens[0], line_no)
        if slot != len(nodes):
            raise GraphFormatError(
                "malformed", f"line {line_no}: slot {slot} out of sequence, expected {len(nodes)}"
            )
        try:
            op = NodeOp[tokens[1]]
        except KeyError:
            raise GraphFormatError(
                "unknown_op", f"line {line_no}: unknown op {tokens[1]!r}", {"slot": slot}
            )
        inputs = tuple(_parse_int(t, line_no) for t in tokens[2:])
        if len(inputs) != op.arity:
            raise GraphFormatError(
                "arity_mismatch",
                f"line {line_no}: arity mismatch, {op.value} takes {op.arity} inputs, got {len(inputs)}",
                {"slot": slot},
            )
        for source in inputs:
            if source >= slot or source < 0:
                raise GraphFormatError(
                    "forward_edge",
                    f"line {line_no}: forward edge from slot {source} into slot {slot}",
                    {"slot": slot, "source": source},
                )
        nodes.append(Node(op, inputs))

    out_tokens = lines[-1].split()
    if len(out_tokens) != 2:
        raise GraphFormatError("malformed", "OUT line must be 'OUT <slot>'")
    output_slot = _parse_int(out_tokens[1], len(lines))
    if not 0 <= output_slot < len(nodes):
        raise GraphFormatError(
            "output_out_of_range",
            f"output slot {output_slot} out of range for {len(nodes)} slots",
            {"output_slot": output_slot},
        )

    num_inputs = sum(1 for node in nodes[: len(INPUT_OPS)] if node.op.is_input)
    try:
        capacity = max_slots if declared else max(max_slots, len(nodes))
        return ProgramGraph(tuple(nodes), num_inputs, output_slot, capacity)
    except InvalidGraphError as e:
        raise GraphFormatError("malformed", f"record violates graph invariants: {e.message}", e.details)


def dump_candidates(entries: Sequence[Tuple[ProgramGraph, float]]) -> str:
    """
    Population snapshot: blank-line separated blocks, each a ``# fitness`` line
    followed by the serialized graph.
    """
    blocks = [f"# fitness {fitness!r}\n{serialize(graph)}" for graph, fitness in entries]
    return "\n".join(blocks)


def load_candidates(text: str, max_slots: int = DEFAULT_MAX_SLOTS) -> List[Tuple[ProgramGraph, float]]:
    """Inverse of :func:`dump_candidates`."""
    entries = []
    for block in text.strip().split("\n\n"):
        if not block.strip():
            continue
        header, _, body = block.strip().partition("\n")
        if not header.startswith("# fitness "):
            raise GraphFormatError("malformed", "snapshot block must start with '# fitness <value>'")
        fitness = float(header[len("# fitness "):])
        entries.append((deserialize(body, max_slots), fitness))
    return entries
