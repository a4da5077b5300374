"""
Nguyen symbolic-regression domain.
"""
from .evaluation import (
    FitnessRecord,
    evaluate_graph,
    evaluate_outputs,
    evaluate_with_outputs,
    fitness,
    fitness_from_rmse,
    squash,
)
from .operators import MutationMove, apply_move, mutate_graph, random_graph
from .tasks import NUM_SAMPLE_POINTS, SymRegTask, make_task, sample_points_csv, target_value

__all__ = [
    "FitnessRecord",
    "evaluate_graph",
    "evaluate_outputs",
    "evaluate_with_outputs",
    "fitness",
    "fitness_from_rmse",
    "squash",
    "MutationMove",
    "apply_move",
    "mutate_graph",
    "random_graph",
    "NUM_SAMPLE_POINTS",
    "SymRegTask",
    "make_task",
    "sample_points_csv",
    "target_value",
]
