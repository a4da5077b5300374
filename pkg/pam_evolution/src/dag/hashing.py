"""
Structural and functional digests of program graphs.
"""
from hashlib import blake2b
from typing import Dict

import numpy as np

from .graph import ProgramGraph, active_subgraph

WL_ROUNDS = 5
OUTPUT_ROUNDING_DECIMALS = 10


def _digest(label: bytes) -> bytes:
    return blake2b(label, digest_size=8).digest()


def _as_int(digest: bytes) -> int:
    return int.from_bytes(digest, "little")


def structural_hash(g: ProgramGraph, rounds: int = WL_ROUNDS) -> int:
    """
    64-bit digest of the active subgraph, invariant to slot relabeling.

    Weisfeiler-Lehman refinement: each node label starts from its op kind and
    the positions of its input edges; each round rehashes a node together with
    its input labels listed by edge position, so operand order matters. The
    final digest combines the sorted multiset of node labels with the output
    node's label.
    """
    active = active_subgraph(g)
    labels: Dict[int, bytes] = {}
    for slot in active:
        node = g.nodes[slot]
        positions = ",".join(str(p) for p in range(len(node.inputs)))
        labels[slot] = _digest(f"{node.op.value}|{positions}".encode("ascii"))

    for _ in range(rounds):
        refined: Dict[int, bytes] = {}
        for slot in active:
            parts = [labels[slot]]
            for position, source in enumerate(g.nodes[slot].inputs):
                parts.append(bytes([position]) + labels[source])
            refined[slot] = _digest(b"".join(parts))
        labels = refined

    combined = b"".join(sorted(labels.values())) + b"|" + labels[g.output_slot]
    return _as_int(_digest(combined))


def canonical_outputs(outputs: np.ndarray) -> np.ndarray:
    """
    Output vector rounded to 1e-10, with non-finite entries collapsed to one
    canonical NaN and negative zero to zero.
    """
    values = np.round(np.asarray(outputs, dtype=np.float64), OUTPUT_ROUNDING_DECIMALS) + 0.0
    return np.where(np.isfinite(values), values, np.nan)


def functional_hash(outputs: np.ndarray) -> int:
    """64-bit digest of the canonical form of an evaluated output vector."""
    values = canonical_outputs(outputs)
    return _as_int(_digest(values.astype("<f8").tobytes()))


def format_hash(value: int) -> str:
    """Fixed-width hex rendering used in logs."""
    return f"{value:016x}"
