"""
Custom exceptions for pam-evolution.
"""
from typing import Optional, Dict, Any


class PamEvolutionError(Exception):
    """Base exception for all pam-evolution errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if self.details:
            return f"{self.message} - Details: {self.details}"
        return self.message


class ConfigurationError(PamEvolutionError):
    """Raised when configuration is invalid or missing."""
    pass


class ModelConfigurationError(ConfigurationError):
    """Raised when a predictor parameter vector does not match its configuration."""
    pass


class GraphError(PamEvolutionError):
    """Base exception for program-graph errors."""
    pass


class InvalidGraphError(GraphError):
    """Raised when a program graph violates its structural invariants."""
    pass


class GraphFormatError(GraphError):
    """Raised when a serialized graph record cannot be parsed."""

    def __init__(self, reason: str, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.reason = reason


class TaskError(PamEvolutionError):
    """Raised for unknown tasks or malformed task inputs."""
    pass


class PredictorError(PamEvolutionError):
    """Base exception for predictor errors."""
    pass


class TrainingStepError(PredictorError):
    """Raised when a training step produces a non-finite loss or gradient."""
    pass


class CheckpointError(PredictorError):
    """Raised when a model or run checkpoint cannot be loaded."""
    pass


class EvolutionError(PamEvolutionError):
    """Base exception for evolution errors."""
    pass


class EmptyPopulationError(EvolutionError):
    """Raised when selecting from an empty population."""
    pass


class AggregationError(PamEvolutionError):
    """Raised when run directories cannot be aggregated."""
    pass


class AnalysisError(PamEvolutionError):
    """Raised when analysis inputs are inconsistent."""
    pass
