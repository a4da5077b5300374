"""
Shared fixtures: tasks, hand-built graphs and small experiment configs.
"""
from pathlib import Path
from typing import Any, Callable, Dict

import numpy as np
import pytest

from src.config.settings import EncoderConfig, ExperimentConfig
from src.dag.graph import Node, NodeOp, ProgramGraph, build_graph
from src.symreg.tasks import SymRegTask, make_task

TINY_ENCODER = {
    "node_embed_dim": 6,
    "edge_embed_dim": 3,
    "hidden_dim": 5,
    "num_layers": 2,
    "graph_dim": 5,
}


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


@pytest.fixture
def nguyen5() -> SymRegTask:
    return make_task("nguyen5", seed=0)


@pytest.fixture
def nguyen12() -> SymRegTask:
    return make_task("nguyen12", seed=0)


@pytest.fixture(scope="session")
def tiny_encoder() -> EncoderConfig:
    return EncoderConfig(**TINY_ENCODER)


def _relabel_slots(g: ProgramGraph, rng: np.random.Generator) -> ProgramGraph:
    """Same program with its operator slots renumbered in a random topological order."""
    k = g.num_inputs
    order = list(range(k))
    new_index = {slot: slot for slot in range(k)}
    remaining = set(range(k, len(g)))
    while remaining:
        ready = sorted(s for s in remaining if all(i in new_index for i in g.nodes[s].inputs))
        pick = ready[int(rng.integers(len(ready)))]
        new_index[pick] = len(order)
        order.append(pick)
        remaining.remove(pick)
    nodes = tuple(Node(g.nodes[old].op, tuple(new_index[i] for i in g.nodes[old].inputs)) for old in order)
    return ProgramGraph(nodes, k, new_index[g.output_slot], g.max_slots)


@pytest.fixture(scope="session")
def relabel_slots() -> Callable[[ProgramGraph, np.random.Generator], ProgramGraph]:
    return _relabel_slots


@pytest.fixture
def sin_cos_graph() -> ProgramGraph:
    """sin(x) + cos(x) with one unreachable slot."""
    return build_graph(
        [
            (NodeOp.SIN, (0,)),      # 1
            (NodeOp.COS, (0,)),      # 2
            (NodeOp.EXP, (1,)),      # 3, inactive
            (NodeOp.ADD, (1, 2)),    # 4
        ]
    )


@pytest.fixture
def make_config(tmp_path: Path) -> Callable[..., ExperimentConfig]:
    """Factory for small, fast experiment configs writing under ``tmp_path``."""

    def factory(**overrides: Any) -> ExperimentConfig:
        base: Dict[str, Any] = {
            "task": "nguyen5",
            "seed": 0,
            "population_size": 10,
            "tournament_size": 3,
            "total_samples": 30,
            "max_slots": 8,
            "replay_capacity": 200,
            "checkpoint_every": 0,
            "out_dir": str(tmp_path / "run"),
            "strategy": {"kind": "pam_rt", "max_attempts": 4, "pairwise_list_size": 4},
            "predictor": {"mode": "learned"},
            "encoder": dict(TINY_ENCODER),
            "schedule": {"frequency": 10, "epochs_per_trigger": 1, "min_data": 10, "batch_size": 8},
        }
        return ExperimentConfig.model_validate(_merge(base, overrides))

    return factory


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
