"""
Hill-climbing theory, counterfactual model evaluation and uniqueness tracking.
"""
from .counterfactual import (
    CounterfactualCollector,
    CounterfactualRecord,
    CounterfactualReport,
    CurvePoint,
    HistogramBin,
    counterfactual_run,
    curve_point,
    flatten_records,
    score_histograms,
    summarize_records,
    threshold_curves,
)
from .hillclimb import (
    HillClimbParams,
    cumulative_hill_climb_rate,
    hill_climb_grid,
    modified_rate,
    p_accept,
    simulate_modified_rate,
)
from .uniqueness import UniquenessPoint, uniqueness_csv, uniqueness_curves

__all__ = [
    "CounterfactualCollector",
    "CounterfactualRecord",
    "CounterfactualReport",
    "CurvePoint",
    "HistogramBin",
    "counterfactual_run",
    "curve_point",
    "flatten_records",
    "score_histograms",
    "summarize_records",
    "threshold_curves",
    "HillClimbParams",
    "cumulative_hill_climb_rate",
    "hill_climb_grid",
    "modified_rate",
    "p_accept",
    "simulate_modified_rate",
    "UniquenessPoint",
    "uniqueness_csv",
    "uniqueness_curves",
]
