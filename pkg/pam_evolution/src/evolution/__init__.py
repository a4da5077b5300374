"""
Regularized evolution with aging, tournaments and functional-equivalence caching.
"""
from .fec import EvaluationStats, FecCache, evaluate, evaluate_record
from .population import Candidate, PopulationBuffer, tournament_select
from .regevo import (
    MutationStrategy,
    best_so_far,
    evaluate_outcome,
    fitness_lookup,
    init_population,
    regevo_step,
)

__all__ = [
    "EvaluationStats",
    "FecCache",
    "evaluate",
    "evaluate_record",
    "Candidate",
    "PopulationBuffer",
    "tournament_select",
    "MutationStrategy",
    "best_so_far",
    "evaluate_outcome",
    "fitness_lookup",
    "init_population",
    "regevo_step",
]
