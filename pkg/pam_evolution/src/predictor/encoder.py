"""
Message-passing graph encoder with an explicit backward pass.

Graphs of a batch are stacked into one disjoint union: node arrays are
concatenated and edge endpoints offset, so a single set of matrix products
serves the whole batch. For every layer

    m_uv = ReLU([h_u ; e_uv] W_m + b_m)
    h_v' = ReLU(ReLU((h_v + sum_u m_uv) W_1 + b_1) W_2 + b_2)

and the graph embedding is the sum of final node states.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..dag.graph import ProgramGraph, active_slots
from .layout import ParamLayout


@dataclass(frozen=True)
class GraphArrays:
    """Active subgraph as index arrays (local node ids)."""
    ops: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    pos: np.ndarray


@lru_cache(maxsize=200_000)
def graph_arrays(g: ProgramGraph) -> GraphArrays:
    slots = active_slots(g)
    local = {slot: i for i, slot in enumerate(slots)}
    ops = np.array([g.nodes[s].op.index for s in slots], dtype=np.int64)
    src, dst, pos = [], [], []
    for slot in slots:
        for position, source in enumerate(g.nodes[slot].inputs):
            src.append(local[source])
            dst.append(local[slot])
            pos.append(position)
    return GraphArrays(
        ops=ops,
        src=np.array(src, dtype=np.int64),
        dst=np.array(dst, dtype=np.int64),
        pos=np.array(pos, dtype=np.int64),
    )


@dataclass
class GraphBatch:
    """Disjoint union of several graphs."""
    ops: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    pos: np.ndarray
    graph_index: np.ndarray
    num_graphs: int

    @classmethod
    def from_graphs(cls, graphs: Sequence[ProgramGraph]) -> "GraphBatch":
        parts = [graph_arrays(g) for g in graphs]
        offsets = np.cumsum([0] + [len(p.ops) for p in parts[:-1]])
        return cls(
            ops=np.concatenate([p.ops for p in parts]),
            src=np.concatenate([p.src + o for p, o in zip(parts, offsets)]),
            dst=np.concatenate([p.dst + o for p, o in zip(parts, offsets)]),
            pos=np.concatenate([p.pos for p in parts]),
            graph_index=np.concatenate(
                [np.full(len(p.ops), i, dtype=np.int64) for i, p in enumerate(parts)]
            ),
            num_graphs=len(graphs),
        )


@dataclass
class _LayerCache:
    h_in: np.ndarray
    x: np.ndarray
    m_pre: np.ndarray
    s: np.ndarray
    u1_pre: np.ndarray
    u1: np.ndarray
    u2_pre: np.ndarray


@dataclass
class EncoderCache:
    """Intermediates kept for the backward pass."""
    batch: GraphBatch
    edge_features: np.ndarray
    layers: List[_LayerCache] = field(default_factory=list)


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def encode_batch(
    layout: ParamLayout, weights: Dict[str, np.ndarray], batch: GraphBatch
) -> Tuple[np.ndarray, EncoderCache]:
    """
    Forward pass.

    Returns:
        (num_graphs, graph_dim) embeddings and the cache for :func:`encode_backward`
    """
    h = weights["node_embedding"][batch.ops]
    edge_features = weights["edge_embedding"][batch.pos]
    cache = EncoderCache(batch=batch, edge_features=edge_features)

    for layer in range(layout.config.num_layers):
        prefix = f"layers.{layer}"
        x = np.concatenate([h[batch.src], edge_features], axis=1)
        m_pre = x @ weights[f"{prefix}.message.weight"] + weights[f"{prefix}.message.bias"]
        aggregated = np.zeros_like(h)
        np.add.at(aggregated, batch.dst, _relu(m_pre))
        s = h + aggregated
        u1_pre = s @ weights[f"{prefix}.update1.weight"] + weights[f"{prefix}.update1.bias"]
        u1 = _relu(u1_pre)
        u2_pre = u1 @ weights[f"{prefix}.update2.weight"] + weights[f"{prefix}.update2.bias"]
        cache.layers.append(_LayerCache(h, x, m_pre, s, u1_pre, u1, u2_pre))
        h = _relu(u2_pre)

    embeddings = np.zeros((batch.num_graphs, h.shape[1]), dtype=np.float64)
    np.add.at(embeddings, batch.graph_index, h)
    return embeddings, cache


def encode_backward(
    layout: ParamLayout,
    weights: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    cache: EncoderCache,
    d_embeddings: np.ndarray,
) -> None:
    """Accumulate encoder parameter gradients into ``grads`` given d(loss)/d(embeddings)."""
    batch = cache.batch
    d_h = d_embeddings[batch.graph_index]
    d_edge_features = np.zeros_like(cache.edge_features)

    for layer in reversed(range(layout.config.num_layers)):
        prefix = f"layers.{layer}"
        c = cache.layers[layer]
        d_in = layout.layer_input_dim(layer)

        d_u2_pre = d_h * (c.u2_pre > 0)
        grads[f"{prefix}.update2.weight"] += c.u1.T @ d_u2_pre
        grads[f"{prefix}.update2.bias"] += d_u2_pre.sum(axis=0)
        d_u1_pre = (d_u2_pre @ weights[f"{prefix}.update2.weight"].T) * (c.u1_pre > 0)
        grads[f"{prefix}.update1.weight"] += c.s.T @ d_u1_pre
        grads[f"{prefix}.update1.bias"] += d_u1_pre.sum(axis=0)
        d_s = d_u1_pre @ weights[f"{prefix}.update1.weight"].T

        d_m_pre = d_s[batch.dst] * (c.m_pre > 0)
        grads[f"{prefix}.message.weight"] += c.x.T @ d_m_pre
        grads[f"{prefix}.message.bias"] += d_m_pre.sum(axis=0)
        d_x = d_m_pre @ weights[f"{prefix}.message.weight"].T

        d_h = d_s.copy()
        np.add.at(d_h, batch.src, d_x[:, :d_in])
        d_edge_features += d_x[:, d_in:]

    np.add.at(grads["node_embedding"], batch.ops, d_h)
    np.add.at(grads["edge_embedding"], batch.pos, d_edge_features)
