"""
Binary model checkpoints.

Layout (little-endian): ``b"PAMP"`` magic, uint32 version, uint32 head kind,
six uint32 dimensions (node_embed, edge_embed, hidden, num_layers,
graph_dim, num_op_kinds), uint64 parameter count, then float64 parameters.
"""
import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..config.settings import EncoderConfig, HeadKind
from ..exceptions import CheckpointError, ModelConfigurationError
from .model import PredictorModel

MAGIC = b"PAMP"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4s8IQ")
_HEAD_CODES = {HeadKind.BINARY: 0, HeadKind.REGRESSION: 1}
_HEAD_KINDS = {code: kind for kind, code in _HEAD_CODES.items()}


def model_to_bytes(model: PredictorModel) -> bytes:
    config = model.config
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        _HEAD_CODES[model.head_kind],
        config.node_embed_dim,
        config.edge_embed_dim,
        config.hidden_dim,
        config.num_layers,
        config.graph_dim,
        model.num_op_kinds,
        model.params.size,
    )
    return header + model.params.astype("<f8").tobytes()


def model_from_bytes(data: bytes) -> PredictorModel:
    """
    Raises:
        CheckpointError: On bad magic, unknown version or head kind, or a
            parameter count that disagrees with the header or the payload
    """
    if len(data) < _HEADER.size:
        raise CheckpointError("checkpoint is truncated", {"bytes": len(data)})
    magic, version, head_code, dn, de, dh, layers, dg, kinds, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError("not a predictor checkpoint", {"magic": magic.hex()})
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if head_code not in _HEAD_KINDS:
        raise CheckpointError(f"unknown head kind code {head_code}")

    payload = data[_HEADER.size:]
    if len(payload) != count * 8:
        raise CheckpointError(
            "parameter payload does not match header count",
            {"count": count, "payload_bytes": len(payload)},
        )
    try:
        config = EncoderConfig(
            node_embed_dim=dn, edge_embed_dim=de, hidden_dim=dh, num_layers=layers, graph_dim=dg
        )
    except ValueError as e:
        raise CheckpointError("checkpoint carries an invalid encoder configuration", {"error": str(e)})

    params = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    try:
        return PredictorModel(params, config, _HEAD_KINDS[head_code], kinds)
    except ModelConfigurationError as e:
        raise CheckpointError("parameter count does not match encoder configuration", {"error": str(e)})


def save_model(model: PredictorModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(model_to_bytes(model))
    return path


def load_model(path: Union[str, Path]) -> PredictorModel:
    """
    Raises:
        CheckpointError: If the file is missing or malformed
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"model checkpoint not found: {path}")
    return model_from_bytes(path.read_bytes())
