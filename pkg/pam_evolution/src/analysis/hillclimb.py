"""
Hill-climbing rates under predictor-guided acceptance.

With natural hill-climb rate q (a random mutation improves on its parent)
and model accuracy a, a child is accepted with probability

    p_accept = q*a + (1 - q)*(1 - a)

and, retrying until acceptance, the returned child is an improvement with
probability q*a / p_accept.
"""
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from ..exceptions import ConfigurationError


@dataclass(frozen=True)
class HillClimbParams:
    """Natural hill-climb rate ``q`` and model accuracy ``a``."""
    q: float
    a: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.q <= 1.0:
            raise ConfigurationError(f"q must be in [0, 1], got {self.q}")
        if not 0.5 <= self.a <= 1.0:
            raise ConfigurationError(f"a must be in [0.5, 1], got {self.a}")


def p_accept(hp: HillClimbParams) -> float:
    return hp.q * hp.a + (1.0 - hp.q) * (1.0 - hp.a)


def modified_rate(hp: HillClimbParams) -> float:
    """Improvement probability of the accepted child as attempts grow without bound; 0 if nothing can be accepted."""
    accept = p_accept(hp)
    if accept == 0.0:
        return 0.0
    return hp.q * hp.a / accept


def simulate_modified_rate(
    hp: HillClimbParams, max_attempts: int, trials: int, rng: np.random.Generator
) -> float:
    """
    Monte Carlo of the retry process: each attempt draws an independent
    child quality (improves with prob. q) and prediction correctness (prob.
    a); a child is accepted when the prediction says "better". After
    ``max_attempts`` the last child is returned regardless.

    Returns:
        Fraction of trials whose returned child is an improvement
    """
    if trials < 1 or max_attempts < 1:
        raise ConfigurationError("trials and max_attempts must be positive")
    active = np.arange(trials)
    improved = np.zeros(trials, dtype=bool)
    for attempt in range(max_attempts):
        n = active.size
        if n == 0:
            break
        better = rng.random(n) < hp.q
        correct = rng.random(n) < hp.a
        accepted = better == correct
        improved[active] = better
        if attempt == max_attempts - 1:
            break
        active = active[~accepted]
    return float(improved.mean())


def cumulative_hill_climb_rate(flags: Sequence[bool]) -> List[float]:
    """Running mean of per-step improvement indicators."""
    if len(flags) == 0:
        raise ConfigurationError("cumulative hill-climb rate needs at least one step")
    values = np.asarray(flags, dtype=np.float64)
    return list(np.cumsum(values) / np.arange(1, values.size + 1))


def hill_climb_grid(qs: Iterable[float], accuracies: Iterable[float]) -> List[HillClimbParams]:
    return [HillClimbParams(q, a) for q in qs for a in accuracies]
