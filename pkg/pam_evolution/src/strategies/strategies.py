"""
Mutation strategies coupling a pairwise predictor to evolution.

Every strategy takes the population and the evolution rng and returns a
:class:`StrategyOutcome`. Predictor strategies read their scorer at call
time, so they always see the latest published model snapshot.
"""
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional

import numpy as np

from ..config.settings import StrategyConfig, StrategyKind
from ..dag.graph import ProgramGraph
from ..evolution.population import Candidate, PopulationBuffer, tournament_select
from ..evolution.regevo import MutationStrategy
from ..exceptions import ConfigurationError
from ..predictor.scorers import PairwiseScorer
from ..symreg.operators import mutate_graph

Mutator = Callable[[ProgramGraph, np.random.Generator], ProgramGraph]


@dataclass(frozen=True)
class StrategyOutcome:
    """The child a strategy settled on and how it got there."""
    child: ProgramGraph
    parent: Candidate
    attempts_used: int
    accepted_by_model: bool
    predictor_queries: int
    strategy: StrategyKind = StrategyKind.VANILLA

    @property
    def parent_fitness(self) -> float:
        return self.parent.fitness


def vanilla(
    pop: PopulationBuffer,
    rng: np.random.Generator,
    tournament_size: int,
    mutator: Mutator = mutate_graph,
) -> StrategyOutcome:
    """Tournament, one mutation, no predictor."""
    parent = tournament_select(pop, tournament_size, rng)
    child = mutator(parent.graph, rng)
    return StrategyOutcome(child, parent, 1, False, 0, StrategyKind.VANILLA)


def pam(
    pop: PopulationBuffer,
    rng: np.random.Generator,
    scorer: PairwiseScorer,
    tournament_size: int,
    max_attempts: int,
    mutator: Mutator = mutate_graph,
) -> StrategyOutcome:
    """
    Select a parent once, then mutate it until the scorer says the child
    beats the parent or ``max_attempts`` children were tried. The last child
    is returned either way.
    """
    if max_attempts < 1:
        raise ConfigurationError(f"max_attempts must be positive, got {max_attempts}")
    parent = tournament_select(pop, tournament_size, rng)
    child, accepted, attempt = parent.graph, False, 0
    for attempt in range(1, max_attempts + 1):
        child = mutator(parent.graph, rng)
        accepted = scorer.score(child, parent.graph).probability > 0.5
        if accepted:
            break
    return StrategyOutcome(child, parent, attempt, accepted, attempt, StrategyKind.PAM)


def pam_rt(
    pop: PopulationBuffer,
    rng: np.random.Generator,
    scorer: PairwiseScorer,
    tournament_size: int,
    max_attempts: int,
    mutator: Mutator = mutate_graph,
) -> StrategyOutcome:
    """Like :func:`pam`, but every attempt runs a fresh tournament."""
    for attempt in range(1, max_attempts + 1):
        parent = tournament_select(pop, tournament_size, rng)
        child = mutator(parent.graph, rng)
        accepted = scorer.score(child, parent.graph).probability > 0.5
        if accepted or attempt == max_attempts:
            return StrategyOutcome(child, parent, attempt, accepted, attempt, StrategyKind.PAM_RT)
    raise ConfigurationError(f"max_attempts must be positive, got {max_attempts}")


def pairwise_scores(logits: np.ndarray) -> np.ndarray:
    """
    Vote totals: each child gets +1 for every other child the scorer says it
    beats (logit >= 0) and -1 otherwise.
    """
    votes = np.where(logits >= 0.0, 1, -1)
    np.fill_diagonal(votes, 0)
    return votes.sum(axis=1)


def max_pairwise(
    pop: PopulationBuffer,
    rng: np.random.Generator,
    scorer: PairwiseScorer,
    tournament_size: int,
    list_size: int,
    mutator: Mutator = mutate_graph,
) -> StrategyOutcome:
    """
    Mutate one tournament winner ``list_size`` times and keep the child with
    the highest vote total; ties go to the lowest index.
    """
    parent = tournament_select(pop, tournament_size, rng)
    children = [mutator(parent.graph, rng) for _ in range(list_size)]
    scores = pairwise_scores(scorer.pairwise_logits(children))
    best = int(np.argmax(scores))
    queries = list_size * (list_size - 1)
    return StrategyOutcome(children[best], parent, 1, True, queries, StrategyKind.MAX_PAIRWISE)


def select_strategy(
    config: StrategyConfig, samples: int, min_data: int, rng: np.random.Generator
) -> StrategyKind:
    """
    Strategy for the next step: vanilla while fewer than ``min_data``
    children exist, vanilla with probability epsilon afterwards, otherwise
    the configured kind. ``rng`` is the exploration-gate stream.
    """
    if config.kind is StrategyKind.VANILLA or samples < min_data:
        return StrategyKind.VANILLA
    if rng.random() < config.epsilon:
        return StrategyKind.VANILLA
    return config.kind


def build_strategy(
    kind: StrategyKind,
    config: StrategyConfig,
    tournament_size: int,
    scorer: Optional[PairwiseScorer] = None,
    mutator: Mutator = mutate_graph,
) -> MutationStrategy:
    """
    Bind strategy parameters into a ``(pop, rng) -> StrategyOutcome`` callable.

    Raises:
        ConfigurationError: If a predictor strategy has no scorer
    """
    if kind is StrategyKind.VANILLA:
        return partial(vanilla, tournament_size=tournament_size, mutator=mutator)
    if scorer is None:
        raise ConfigurationError(f"strategy {kind.value} needs a pairwise scorer")
    if kind is StrategyKind.PAM:
        return partial(pam, scorer=scorer, tournament_size=tournament_size,
                       max_attempts=config.max_attempts, mutator=mutator)
    if kind is StrategyKind.PAM_RT:
        return partial(pam_rt, scorer=scorer, tournament_size=tournament_size,
                       max_attempts=config.max_attempts, mutator=mutator)
    return partial(max_pairwise, scorer=scorer, tournament_size=tournament_size,
                   list_size=config.pairwise_list_size, mutator=mutator)
