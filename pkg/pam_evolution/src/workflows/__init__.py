"""
Experiment drivers: single runs, multi-seed aggregation, sweeps and the
offline studies.
"""
from .aggregate import AggregateReport, aggregate, aggregate_runs, load_run
from .experiments import ablate_predictor, hillclimb_check, hill_climb_surface, run_counterfactual
from .runner import RunSummary, load_population_snapshot, run
from .sweep import SweepController, oracle_sweep

__all__ = [
    "AggregateReport",
    "aggregate",
    "aggregate_runs",
    "load_run",
    "ablate_predictor",
    "hillclimb_check",
    "hill_climb_surface",
    "run_counterfactual",
    "RunSummary",
    "load_population_snapshot",
    "run",
    "SweepController",
    "oracle_sweep",
]
