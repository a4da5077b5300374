"""
DAG program representation, hashing and text serialization.
"""
from .graph import (
    DEFAULT_MAX_SLOTS,
    NUM_OP_KINDS,
    OPERATORS,
    Node,
    NodeOp,
    ProgramGraph,
    active_slots,
    active_subgraph,
    build_graph,
    validate_graph,
)
from .hashing import canonical_outputs, format_hash, functional_hash, structural_hash
from .serialization import deserialize, dump_candidates, load_candidates, serialize

__all__ = [
    "DEFAULT_MAX_SLOTS",
    "NUM_OP_KINDS",
    "OPERATORS",
    "Node",
    "NodeOp",
    "ProgramGraph",
    "active_slots",
    "active_subgraph",
    "build_graph",
    "validate_graph",
    "canonical_outputs",
    "format_hash",
    "functional_hash",
    "structural_hash",
    "deserialize",
    "dump_candidates",
    "load_candidates",
    "serialize",
]
