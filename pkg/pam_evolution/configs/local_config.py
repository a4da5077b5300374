"""
Local default configuration for pam-evolution experiments.

Hyperparameters tuned for the Nguyen benchmarks.
"""
from pathlib import Path
from typing import Dict, Any

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent

LOCAL_CONFIG: Dict[str, Any] = {
    # Evolution
    "population_size": 100,
    "tournament_size": 25,
    "max_slots": 15,
    "fec": True,

    # Strategy
    "max_attempts": 64,
    "epsilon": 0.0,
    "pairwise_list_size": 64,

    # Online training
    "replay_capacity": 10_000,
    "train_frequency": 100,
    "epochs_per_trigger": 10,
    "min_data": 100,
    "batch_size": 64,

    # Optimizer
    "learning_rate": 1e-4,
    "weight_decay": 1e-5,
    "beta1": 0.9,
    "beta2": 0.999,
    "adam_eps": 1e-8,

    # Encoder
    "node_embed_dim": 64,
    "edge_embed_dim": 16,
    "hidden_dim": 64,
    "num_layers": 3,
    "graph_dim": 64,

    # Bookkeeping
    "checkpoint_every": 1000,

    # Sample budgets per task
    "task_samples": {
        "nguyen2": 20_000,
        "nguyen3": 20_000,
        "nguyen5": 20_000,
        "nguyen7": 20_000,
        "nguyen12": 100_000,
    },

    # Analysis
    "counterfactual_fanout": 64,
    "threshold_points": 101,
    "histogram_bins": 20,

    # Paths
    "paths": {
        "project_root": PROJECT_ROOT,
        "runs": PROJECT_ROOT / "runs",
        "logs": PROJECT_ROOT / "logs",
        "configs": PROJECT_ROOT / "configs",
    },
}


def get_task_samples(task: str) -> int:
    """Default sample budget for a task."""
    return LOCAL_CONFIG["task_samples"][task]


def get_paths() -> Dict[str, Path]:
    """Get project paths."""
    return LOCAL_CONFIG["paths"].copy()
