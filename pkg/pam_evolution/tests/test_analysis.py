"""
Tests for hill-climb theory, counterfactual curves and uniqueness tracking.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.analysis import (
    CounterfactualCollector,
    CounterfactualRecord,
    HillClimbParams,
    counterfactual_run,
    cumulative_hill_climb_rate,
    curve_point,
    flatten_records,
    hill_climb_grid,
    modified_rate,
    p_accept,
    score_histograms,
    simulate_modified_rate,
    summarize_records,
    threshold_curves,
    uniqueness_csv,
    uniqueness_curves,
)
from src.analysis.counterfactual import curves_csv, histogram_csv, records_csv
from src.evolution.regevo import init_population
from src.exceptions import AnalysisError, ConfigurationError
from src.predictor.scorers import NoisyOracle
from src.strategies.strategies import pam_rt
from src.symreg.operators import mutate_graph
from src.training.online import OnlineEvolution
from src.training.run_log import PHASE_CHILD, PHASE_INIT, RunRecord


def _row(phase, index, digest):
    return RunRecord(
        phase=phase,
        sample_index=index,
        strategy="random" if phase == PHASE_INIT else "vanilla",
        child_fitness=0.5,
        parent_fitness=None if phase == PHASE_INIT else 0.5,
        best_fitness=0.5,
        attempts_used=0 if phase == PHASE_INIT else 1,
        accepted_by_model=False,
        predictor_queries=0,
        fec_hit=False,
        cumulative_hill_climb_rate=None if phase == PHASE_INIT else 0.0,
        structural_hash=digest,
    )


class TestHillClimbTheory:

    def test_acceptance_probability(self):
        assert p_accept(HillClimbParams(0.3, 0.8)) == pytest.approx(0.38)

    def test_modified_rate_example(self):
        assert modified_rate(HillClimbParams(0.1, 0.8)) == pytest.approx(4 / 13)

    def test_chance_model_changes_nothing(self):
        assert modified_rate(HillClimbParams(0.27, 0.5)) == pytest.approx(0.27)

    def test_no_acceptable_child(self):
        assert modified_rate(HillClimbParams(0.0, 1.0)) == 0.0

    @given(q=st.floats(0.0, 1.0), a=st.floats(0.5, 1.0))
    def test_better_than_chance_never_hurts(self, q, a):
        assert modified_rate(HillClimbParams(q, a)) >= q - 1e-12

    @pytest.mark.parametrize("q,a", [(-0.1, 0.8), (1.1, 0.8), (0.2, 0.4), (0.2, 1.01)])
    def test_invalid_params(self, q, a):
        with pytest.raises(ConfigurationError):
            HillClimbParams(q, a)

    def test_grid(self):
        grid = hill_climb_grid([0.1, 0.2], [0.5, 0.9, 1.0])
        assert len(grid) == 6
        assert grid[0] == HillClimbParams(0.1, 0.5)


class TestSimulation:

    def test_retry_matches_closed_form(self):
        hp = HillClimbParams(0.1, 0.8)
        rate = simulate_modified_rate(hp, 64, 100_000, np.random.default_rng(1))
        assert rate == pytest.approx(modified_rate(hp), abs=0.01)

    def test_single_attempt_is_natural_rate(self):
        hp = HillClimbParams(0.2, 0.9)
        rate = simulate_modified_rate(hp, 1, 100_000, np.random.default_rng(2))
        assert rate == pytest.approx(0.2, abs=0.01)

    def test_bad_arguments(self):
        with pytest.raises(ConfigurationError):
            simulate_modified_rate(HillClimbParams(0.1, 0.8), 0, 10, np.random.default_rng(0))

    def test_cumulative_rate(self):
        assert cumulative_hill_climb_rate([True, False, True, False]) == pytest.approx([1.0, 0.5, 2 / 3, 0.5])
        with pytest.raises(ConfigurationError):
            cumulative_hill_climb_rate([])


class BernoulliMutator:
    """Real mutations whose hidden fitness is 1 with probability q and 0 otherwise; parents sit at 0.5."""

    def __init__(self, q, rng):
        self.q = q
        self.rng = rng
        self.children = []
        self.fitness = {}

    def __call__(self, graph, rng):
        child = mutate_graph(graph, rng)
        self.children.append(child)  # keeps ids unique
        self.fitness[id(child)] = 1.0 if self.rng.random() < self.q else 0.0
        return child

    def truth(self, graph):
        return self.fitness.get(id(graph), 0.5)


class TestRetryLoop:

    @pytest.mark.parametrize("q", [0.1, 0.3, 0.6])
    @pytest.mark.parametrize("a", [0.6, 0.8, 1.0])
    def test_pam_rt_matches_closed_form(self, nguyen5, q, a):
        population = init_population(nguyen5, 10, np.random.default_rng(0), max_slots=8)
        mutator = BernoulliMutator(q, np.random.default_rng(1))
        oracle = NoisyOracle(mutator.truth, a, np.random.default_rng(2))
        rng = np.random.default_rng(3)
        n = 2000
        improved, accepted, attempts = 0, 0, 0
        for _ in range(n):
            outcome = pam_rt(population, rng, oracle, tournament_size=3, max_attempts=64, mutator=mutator)
            improved += mutator.truth(outcome.child) > mutator.truth(outcome.parent.graph)
            accepted += outcome.accepted_by_model
            attempts += outcome.attempts_used

        hp = HillClimbParams(q, a)
        expected = modified_rate(hp)
        tolerance = 4 * math.sqrt(expected * (1 - expected) / n) + 0.01
        assert abs(improved / n - expected) < tolerance

        accept = p_accept(hp)
        assert abs(accepted / attempts - accept) < 4 * math.sqrt(accept * (1 - accept) / attempts)


class TestCurves:

    @settings(max_examples=60, deadline=None)
    @given(
        data=st.lists(st.tuples(st.floats(0.0, 1.0), st.booleans()), min_size=1, max_size=40),
        threshold=st.floats(0.0, 1.0),
    )
    def test_curve_point_matches_recount(self, data, threshold):
        scores = np.array([s for s, _ in data])
        labels = np.array([y for _, y in data])
        point = curve_point(scores, labels, threshold)
        tp = sum(1 for s, y in data if s > threshold and y)
        fp = sum(1 for s, y in data if s > threshold and not y)
        fn = sum(1 for s, y in data if s <= threshold and y)
        tn = len(data) - tp - fp - fn
        assert point.accuracy == pytest.approx((tp + tn) / len(data))
        assert point.precision == pytest.approx(tp / (tp + fp) if tp + fp else 1.0)
        assert point.recall == pytest.approx(tp / (tp + fn) if tp + fn else 0.0)

    def test_edge_conventions(self):
        point = curve_point(np.array([0.2, 0.3]), np.array([False, False]), 0.5)
        assert (point.precision, point.recall, point.accuracy) == (1.0, 0.0, 1.0)

    def test_threshold_grid(self):
        curves = threshold_curves([0.1, 0.9], [False, True])
        assert len(curves) == 101
        assert curves[0].threshold == 0.0 and curves[-1].threshold == 1.0
        assert curves[50].accuracy == 1.0

    def test_histogram_counts(self):
        scores = [0.0, 0.05, 0.5, 1.0, 0.99]
        labels = [False, True, True, False, True]
        bins = score_histograms(scores, labels)
        assert len(bins) == 20
        assert sum(b.count_negative for b in bins) == 2
        assert sum(b.count_positive for b in bins) == 3
        assert bins[-1].count_negative == 1

    def test_labels_are_strict_improvement(self):
        record = CounterfactualRecord(3, 0.5, [0.1, 0.9, 0.7], [0.5, 0.6, 0.4])
        np.testing.assert_array_equal(record.labels, [False, True, False])
        with pytest.raises(AnalysisError):
            CounterfactualRecord(3, 0.5, [0.1], [0.5, 0.6])

    def test_summary_and_csv(self):
        records = [
            CounterfactualRecord(10, 0.5, [0.9, 0.1], [0.7, 0.2]),
            CounterfactualRecord(11, 0.5, [0.6, 0.4], [0.1, 0.9]),
        ]
        scores, labels = flatten_records(records)
        assert scores.size == labels.size == 4
        report = summarize_records(records)
        assert report.accuracy_at_half == 0.5
        assert report.base_positive_rate == 0.5
        assert len(records_csv(records).splitlines()) == 5
        assert curves_csv(report.curves).startswith("threshold,accuracy,precision,recall\n")
        assert len(histogram_csv(report.histogram).splitlines()) == 21


class TestCounterfactualRun:

    def test_collector_with_oracle(self, make_config):
        config = make_config(
            total_samples=25,
            strategy={"kind": "vanilla"},
            predictor={"mode": "noisy_oracle", "accuracy": 0.8},
        )
        engine = OnlineEvolution(config)
        collector = CounterfactualCollector(5, engine.streams["counterfactual"], config.schedule.min_data)
        engine.observer = collector
        engine.run()
        assert [r.step for r in collector.records] == list(range(10, 25))
        assert all(len(r.candidate_scores) == 5 for r in collector.records)
        assert all(s in (0.0, 1.0) for r in collector.records for s in r.candidate_scores)

    def test_learned_run_never_steers(self, make_config):
        report = counterfactual_run(make_config(), fanout=3)
        children = [r for r in report.run.records if r.phase == PHASE_CHILD]
        assert {r.strategy for r in children} == {"vanilla"}
        assert all(r.predictor_queries == 0 for r in children)
        assert len(report.run.training_reports) == 3
        assert len(report.records) == 20
        assert all(0.0 <= s <= 1.0 for r in report.records for s in r.candidate_scores)


class TestUniqueness:

    def test_curves(self):
        records = [
            _row(PHASE_INIT, 0, "a"),
            _row(PHASE_INIT, 0, "b"),
            _row(PHASE_INIT, 0, "a"),
            _row(PHASE_CHILD, 1, "c"),
            _row(PHASE_CHILD, 2, "c"),
            _row(PHASE_CHILD, 3, "d"),
        ]
        points = uniqueness_curves(records, population_size=3)
        assert [(p.sample_index, p.unique_in_population, p.cumulative_unique) for p in points] == [
            (0, 2, 2),
            (1, 3, 3),
            (2, 2, 3),
            (3, 2, 4),
        ]
        assert uniqueness_csv(points).splitlines()[0] == "sample_index,unique_in_population,cumulative_unique"
