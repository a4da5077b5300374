"""
Vanilla, PAM, PAM-RT and Max-Pairwise mutation strategies.
"""
from .strategies import (
    Mutator,
    StrategyOutcome,
    build_strategy,
    max_pairwise,
    pairwise_scores,
    pam,
    pam_rt,
    select_strategy,
    vanilla,
)

__all__ = [
    "Mutator",
    "StrategyOutcome",
    "build_strategy",
    "max_pairwise",
    "pairwise_scores",
    "pam",
    "pam_rt",
    "select_strategy",
    "vanilla",
]
