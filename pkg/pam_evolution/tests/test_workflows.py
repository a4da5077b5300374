"""
Tests for the run driver, aggregation, the sweep controller and offline experiments.
"""
import json
import math

import numpy as np
import pytest

from src.config.settings import ExperimentConfig, HeadKind, load_experiment_config
from src.exceptions import AggregationError, CheckpointError, ConfigurationError
from src.tools.run_store import RunStore
from src.training.run_log import PHASE_CHILD, PHASE_INIT, RunRecord, render_log_csv
from src.workflows import (
    SweepController,
    ablate_predictor,
    aggregate,
    aggregate_runs,
    hill_climb_surface,
    hillclimb_check,
    load_population_snapshot,
    load_run,
    oracle_sweep,
    run,
    run_counterfactual,
)
from src.workflows import sweep as sweep_module
from src.workflows.aggregate import CENSORED, checkpoints_csv, thresholds_csv
from src.workflows.runner import RunSummary
from src.workflows.sweep import sweep_configs

RUN_ARTIFACTS = {
    "config.json",
    "log.csv",
    "best.txt",
    "population.txt",
    "sample_points.csv",
    "uniqueness.csv",
    "summary.json",
    "model.bin",
}


def _write_fake_run(directory, config, best_values):
    """Run directory whose best-so-far series is ``best_values`` (index 0 is the initial population)."""
    rows = [
        RunRecord(
            phase=PHASE_INIT if i == 0 else PHASE_CHILD,
            sample_index=i,
            strategy="random" if i == 0 else "vanilla",
            child_fitness=value,
            parent_fitness=None if i == 0 else 0.0,
            best_fitness=value,
            attempts_used=0 if i == 0 else 1,
            accepted_by_model=False,
            predictor_queries=0,
            fec_hit=False,
            cumulative_hill_climb_rate=None if i == 0 else 0.0,
            structural_hash="0" * 16,
        )
        for i, value in enumerate(best_values)
    ]
    directory.mkdir(parents=True)
    (directory / "config.json").write_text(config.model_dump_json(), encoding="utf-8")
    (directory / "log.csv").write_text(render_log_csv(rows), encoding="utf-8")
    return directory


@pytest.fixture
def fake_runs(tmp_path, make_config):
    config = make_config()
    return [
        _write_fake_run(tmp_path / "seed0", config.model_copy(update={"seed": 0}), [0.1, 0.2, 0.3, 0.4, 0.4]),
        _write_fake_run(tmp_path / "seed1", config.model_copy(update={"seed": 1}), [0.1, 0.3, 0.5, 0.6, 0.6]),
    ]


class TestRunner:

    def test_artifacts_and_summary(self, make_config):
        config = make_config()
        summary = run(config)
        assert {p.name for p in summary.run_dir.iterdir()} >= RUN_ARTIFACTS
        data = json.loads((summary.run_dir / "summary.json").read_text())
        assert data["best_fitness"] == summary.best_fitness
        assert data["evaluations"] + data["fec_hits"] == config.population_size + config.samples
        assert data["training_triggers"] == 3

    def test_config_closure(self, make_config):
        config = make_config()
        summary = run(config)
        again = ExperimentConfig.model_validate_json((summary.run_dir / "config.json").read_text())
        assert again == config
        assert again.digest() == config.digest()

    def test_population_snapshot(self, make_config):
        config = make_config(predictor={"mode": "perfect_oracle"})
        summary = run(config)
        snapshot = load_population_snapshot(summary.run_dir / "population.txt", config.max_slots)
        assert len(snapshot) == config.population_size
        best = load_population_snapshot(summary.run_dir / "best.txt", config.max_slots)
        assert best[0][1] == summary.best_fitness

    def test_resume_without_checkpoint(self, make_config):
        with pytest.raises(CheckpointError):
            run(make_config(), resume=True)

    def test_resume_of_finished_run_is_stable(self, make_config):
        config = make_config(checkpoint_every=10)
        first = run(config)
        log = (first.run_dir / "log.csv").read_text()
        second = run(config, resume=True)
        assert (second.run_dir / "log.csv").read_text() == log

    def test_resume_rejects_other_config(self, make_config):
        run(make_config(checkpoint_every=10))
        with pytest.raises(CheckpointError, match="different configuration"):
            run(make_config(checkpoint_every=10, tournament_size=2), resume=True)


class TestAggregate:

    def test_mean_and_band(self, fake_runs):
        report = aggregate(fake_runs, checkpoints=[0, 4])
        start, end = report.checkpoints
        assert (start.mean, start.standard_error) == (pytest.approx(0.1), pytest.approx(0.0))
        assert end.mean == pytest.approx(0.5)
        assert end.standard_error == pytest.approx(0.1)
        assert (end.lower, end.upper) == (pytest.approx(0.3), pytest.approx(0.7))
        assert end.n_runs == 2

    def test_default_checkpoints(self, fake_runs):
        report = aggregate(fake_runs)
        assert [r.checkpoint for r in report.checkpoints] == [0, 1, 2, 3, 4]

    def test_thresholds_and_censoring(self, fake_runs):
        report = aggregate(fake_runs, thresholds=[0.2, 0.5])
        rows = {(r.threshold, r.run): r for r in report.thresholds}
        assert rows[(0.2, "median")].samples == 1
        assert rows[(0.5, str(fake_runs[0]))].censored
        assert rows[(0.5, str(fake_runs[0]))].samples == CENSORED
        assert rows[(0.5, str(fake_runs[1]))].samples == 2
        assert rows[(0.5, "median")].censored

    def test_needs_two_runs(self, fake_runs):
        with pytest.raises(AggregationError):
            aggregate_runs([load_run(fake_runs[0])])

    def test_mismatched_configs(self, tmp_path, fake_runs, make_config):
        other = _write_fake_run(tmp_path / "other", make_config(population_size=11), [0.1, 0.2, 0.3, 0.4, 0.5])
        with pytest.raises(ConfigurationError):
            aggregate([fake_runs[0], other])

    def test_checkpoint_out_of_range(self, fake_runs):
        with pytest.raises(AggregationError):
            aggregate(fake_runs, checkpoints=[5])

    def test_not_a_run_dir(self, tmp_path):
        with pytest.raises(AggregationError):
            load_run(tmp_path)

    def test_csv_headers(self, fake_runs):
        report = aggregate(fake_runs)
        assert checkpoints_csv(report.checkpoints).splitlines()[0].startswith("checkpoint,n_runs,mean_best_fitness")
        assert thresholds_csv(report.thresholds).splitlines()[0] == "threshold,run,samples_to_threshold,censored"


class TestRunStore:

    async def test_writes_text_bytes_and_nested(self, tmp_path):
        store = RunStore(tmp_path / "store")
        await store.write_all({"a.txt": "alpha\n", "b.bin": b"\x00\x01"})
        assert store.path("a.txt").read_text() == "alpha\n"
        assert store.path("b.bin").read_bytes() == b"\x00\x01"
        await store.write("nested/c.json", "{}\n")
        assert store.exists("nested/c.json")


class TestSweepController:

    async def test_runs_everything(self, make_config, monkeypatch):
        def fake_run(config):
            return RunSummary(config.out_dir, float(config.seed), {})

        monkeypatch.setattr(sweep_module, "run", fake_run)
        controller = SweepController(max_parallel=2)
        configs = {f"s{i}": make_config(seed=i) for i in range(5)}
        results = await controller.run_all(configs)
        assert [r.best_fitness for r in results.values()] == [0.0, 1.0, 2.0, 3.0, 4.0]
        assert set(controller.completed) == set(configs)

    async def test_failure_is_reraised(self, make_config, monkeypatch):
        def fake_run(config):
            if config.seed == 1:
                raise RuntimeError("boom")
            return RunSummary(config.out_dir, 0.0, {})

        monkeypatch.setattr(sweep_module, "run", fake_run)
        controller = SweepController()
        with pytest.raises(RuntimeError, match="boom"):
            await controller.run_all({f"s{i}": make_config(seed=i) for i in range(3)})
        assert controller.failed == {"s1": "boom"}
        assert set(controller.completed) == {"s0", "s2"}

    def test_parallelism_validated(self):
        with pytest.raises(ConfigurationError):
            SweepController(0)

    def test_sweep_plan(self, make_config):
        plan = sweep_configs(make_config(strategy={"kind": "vanilla"}), [0.6, 1.0], seeds=[0, 1])
        assert set(plan) == {"oracle_a0.6", "oracle_a1", "vanilla"}
        assert plan["oracle_a0.6"][1].strategy.kind.value == "pam_rt"
        assert plan["oracle_a0.6"][1].predictor.accuracy == 0.6
        assert plan["vanilla"][0].strategy.kind.value == "vanilla"
        assert plan["oracle_a1"][0].out_dir.endswith("oracle_a1/seed0")
        with pytest.raises(ConfigurationError):
            sweep_configs(make_config(), seeds=[0])

    def test_tiny_oracle_sweep(self, make_config, tmp_path):
        config = make_config(total_samples=20, out_dir=str(tmp_path / "sweep"))
        rows = oracle_sweep(config, accuracies=[1.0], seeds=[0, 1], max_parallel=2)
        assert [r.setting for r in rows] == ["oracle_a1", "vanilla"]
        assert all(r.n_runs == 2 for r in rows)
        lines = (tmp_path / "sweep" / "sweep.csv").read_text().splitlines()
        assert lines[0] == "setting,accuracy,n_runs,final_mean_best_fitness,standard_error"
        assert len(lines) == 3
        assert (tmp_path / "sweep" / "vanilla" / "aggregate.csv").exists()


class TestExperiments:

    def test_hillclimb_check(self):
        rows = hillclimb_check(qs=[0.1], accuracies=[0.8], max_attempts=64, trials=100_000)
        assert len(rows) == 1
        assert rows[0].closed_form == pytest.approx(0.30769, abs=1e-5)
        assert rows[0].abs_error < 0.01

    def test_surface(self):
        surface = hill_climb_surface()
        assert len(surface) == 99 * 6
        assert all(rate >= q - 1e-12 for q, _, _, rate in surface)

    def test_tiny_ablation(self, make_config):
        report = ablate_predictor(make_config(), dataset_size=60, epochs=2, training_seeds=1, layers=[1])
        assert [(r.head, r.num_layers) for r in report.rows] == [
            (HeadKind.BINARY, 2),
            (HeadKind.REGRESSION, 2),
            (HeadKind.BINARY, 1),
        ]
        assert (report.train_size, report.test_size) == (48, 12)
        assert all(math.isnan(r.accuracy) or 0.0 <= r.accuracy <= 1.0 for r in report.rows)
        assert len(report.summary()["median_accuracy"]) == 3

    def test_ablation_dataset_too_small(self, make_config):
        with pytest.raises(ConfigurationError):
            ablate_predictor(make_config(), dataset_size=5, epochs=1, training_seeds=1)

    def test_counterfactual_artifacts(self, make_config):
        config = make_config()
        report = run_counterfactual(config, fanout=2)
        out = config.out_dir
        written = json.loads(open(f"{out}/config.json").read())
        assert written["strategy"]["kind"] == "vanilla"
        summary = json.loads(open(f"{out}/counterfactual_summary.json").read())
        assert summary["steps"] == len(report.records) == 20
        assert summary["candidates"] == 40


def _acceptance_config(out_dir, **overrides):
    return load_experiment_config(overrides={"out_dir": str(out_dir), "checkpoint_every": 0, **overrides})


async def _run_seeds(base_dir, seeds=range(5), **overrides):
    configs = {
        f"seed{seed}": _acceptance_config(base_dir / f"seed{seed}", seed=seed, **overrides) for seed in seeds
    }
    return await SweepController(4).run_all(configs)


@pytest.mark.slow
class TestStatistical:
    """Desk-scale versions of the headline results; minutes to hours."""

    def test_hillclimb_grid_within_tolerance(self):
        rows = hillclimb_check(max_attempts=10_000, trials=1_000_000)
        assert max(r.abs_error for r in rows) < 0.01
        assert all(r.closed_form >= r.q for r in rows if r.a > 0.5)

    def test_oracle_accuracy_orders_final_fitness(self, tmp_path):
        config = _acceptance_config(tmp_path / "sweep", task="nguyen12", total_samples=50_000)
        rows = {r.setting: r for r in oracle_sweep(config, accuracies=[1.0, 0.8, 0.6], seeds=range(5))}
        perfect, good, weak, baseline = (rows[k] for k in ("oracle_a1", "oracle_a0.8", "oracle_a0.6", "vanilla"))
        assert perfect.final_mean >= good.final_mean >= weak.final_mean >= baseline.final_mean
        combined = math.sqrt(perfect.standard_error**2 + baseline.standard_error**2)
        assert perfect.final_mean - baseline.final_mean > 2 * combined

    async def test_learned_predictor_reaches_threshold_sooner(self, tmp_path):
        learned = await _run_seeds(tmp_path / "learned", task="nguyen5", total_samples=20_000,
                                   **{"strategy.kind": "pam_rt", "predictor.mode": "learned"})
        baseline = await _run_seeds(tmp_path / "vanilla", task="nguyen5", total_samples=20_000,
                                    **{"strategy.kind": "vanilla"})
        learned_report = aggregate([s.run_dir for s in learned.values()], thresholds=[0.9])
        baseline_report = aggregate([s.run_dir for s in baseline.values()], thresholds=[0.9])

        def median_samples(report):
            row = next(r for r in report.thresholds if r.run == "median")
            return math.inf if row.censored else row.samples

        assert median_samples(learned_report) <= 0.7 * median_samples(baseline_report)
        assert learned_report.checkpoints[-1].mean >= baseline_report.checkpoints[-1].mean

    def test_binary_head_beats_regression(self, tmp_path):
        config = _acceptance_config(tmp_path / "ablation", task="nguyen5")
        medians = ablate_predictor(config, training_seeds=3).medians()
        depth = config.encoder.num_layers
        binary, regression = medians[(HeadKind.BINARY, depth)], medians[(HeadKind.REGRESSION, depth)]
        assert binary > regression
        assert binary >= 0.85

    async def test_perfect_oracle_orders_hill_climb_rate(self, tmp_path):
        rates = {}
        for kind in ("pam_rt", "pam", "vanilla"):
            summaries = await _run_seeds(tmp_path / kind, task="nguyen5", total_samples=10_000,
                                         **{"strategy.kind": kind, "predictor.mode": "perfect_oracle"})
            rates[kind] = float(np.median([s.summary["hill_climb_rate"] for s in summaries.values()]))
        assert rates["pam_rt"] >= rates["pam"] >= rates["vanilla"]
