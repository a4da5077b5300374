"""
Flat parameter-vector layout for the predictor.

All weights live in one float64 vector; the layout maps names to slices and
shapes so the encoder and heads can work on reshaped views.
"""
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from ..config.settings import EncoderConfig, HeadKind
from ..exceptions import ModelConfigurationError

NUM_EDGE_POSITIONS = 2
EMBEDDING_SCALE = 0.1


@dataclass(frozen=True)
class ParamSpec:
    name: str
    shape: Tuple[int, ...]
    offset: int

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


class ParamLayout:
    """Named slices of the flat parameter vector."""

    def __init__(self, config: EncoderConfig, num_op_kinds: int, head_kind: HeadKind):
        self.config = config
        self.num_op_kinds = num_op_kinds
        self.head_kind = head_kind

        shapes: List[Tuple[str, Tuple[int, ...]]] = [
            ("node_embedding", (num_op_kinds, config.node_embed_dim)),
            ("edge_embedding", (NUM_EDGE_POSITIONS, config.edge_embed_dim)),
        ]
        for layer in range(config.num_layers):
            d_in = self.layer_input_dim(layer)
            shapes += [
                (f"layers.{layer}.message.weight", (d_in + config.edge_embed_dim, d_in)),
                (f"layers.{layer}.message.bias", (d_in,)),
                (f"layers.{layer}.update1.weight", (d_in, config.hidden_dim)),
                (f"layers.{layer}.update1.bias", (config.hidden_dim,)),
                (f"layers.{layer}.update2.weight", (config.hidden_dim, config.hidden_dim)),
                (f"layers.{layer}.update2.bias", (config.hidden_dim,)),
            ]
        head_in = 2 * config.graph_dim if head_kind is HeadKind.BINARY else config.graph_dim
        shapes += [
            ("head.hidden.weight", (head_in, config.hidden_dim)),
            ("head.hidden.bias", (config.hidden_dim,)),
            ("head.out.weight", (config.hidden_dim,)),
            ("head.out.bias", (1,)),
        ]

        self.specs: "OrderedDict[str, ParamSpec]" = OrderedDict()
        offset = 0
        for name, shape in shapes:
            spec = ParamSpec(name, shape, offset)
            self.specs[name] = spec
            offset += spec.size
        self.size = offset

    def layer_input_dim(self, layer: int) -> int:
        return self.config.node_embed_dim if layer == 0 else self.config.hidden_dim

    def unpack(self, flat: np.ndarray) -> Dict[str, np.ndarray]:
        """
        Reshaped views into ``flat`` (writes through for gradient buffers).

        Raises:
            ModelConfigurationError: If the vector length does not match the layout
        """
        if flat.ndim != 1 or flat.shape[0] != self.size:
            raise ModelConfigurationError(
                "parameter vector does not match encoder configuration",
                {"expected": self.size, "got": int(flat.size)},
            )
        return {
            name: flat[spec.offset: spec.offset + spec.size].reshape(spec.shape)
            for name, spec in self.specs.items()
        }

    def initialize(self, rng: np.random.Generator) -> np.ndarray:
        """Embeddings ~ N(0, 1) * 0.1; weights and biases ~ U[-s, s], s = 1/sqrt(fan_in)."""
        flat = np.zeros(self.size, dtype=np.float64)
        views = self.unpack(flat)
        for name, view in views.items():
            if name.endswith("embedding"):
                view[...] = rng.standard_normal(view.shape) * EMBEDDING_SCALE
                continue
            weight_name = name.replace(".bias", ".weight")
            fan_in = self.specs[weight_name].shape[0]
            bound = 1.0 / np.sqrt(fan_in)
            view[...] = rng.uniform(-bound, bound, size=view.shape)
        return flat
