"""
Adaptive-moment optimizer with decoupled weight decay.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..config.settings import OptimizerConfig
from .model import PredictorModel


@dataclass(frozen=True, eq=False)
class AdamState:
    """First and second moment estimates plus the step counter."""
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(np.zeros(size, dtype=np.float64), np.zeros(size, dtype=np.float64), 0)


def adam_update(
    params: np.ndarray, grad: np.ndarray, state: AdamState, config: OptimizerConfig
) -> Tuple[np.ndarray, AdamState]:
    """One update on a raw parameter vector; inputs are left untouched."""
    step = state.step + 1
    m = config.beta1 * state.m + (1.0 - config.beta1) * grad
    v = config.beta2 * state.v + (1.0 - config.beta2) * grad * grad
    m_hat = m / (1.0 - config.beta1 ** step)
    v_hat = v / (1.0 - config.beta2 ** step)

    updated = params * (1.0 - config.learning_rate * config.weight_decay)
    updated = updated - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
    return updated, AdamState(m, v, step)


def sgd_step(
    model: PredictorModel, grad: np.ndarray, state: AdamState, config: OptimizerConfig
) -> Tuple[PredictorModel, AdamState]:
    """Apply one optimizer step and return the new model snapshot and state."""
    params, new_state = adam_update(model.params, grad, state, config)
    return model.with_params(params), new_state
