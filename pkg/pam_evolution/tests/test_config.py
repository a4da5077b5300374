"""
Tests for experiment configuration and runtime settings.
"""
import json

import pytest

from configs.local_config import LOCAL_CONFIG, get_task_samples
from src.config import logging_config
from src.config.logging_config import get_logger, setup_logging
from src.config.settings import (
    ExperimentConfig,
    PredictorMode,
    PredictorModeConfig,
    StrategyKind,
    TaskName,
    load_experiment_config,
    load_runtime_settings,
)
from src.exceptions import ConfigurationError

RUNTIME_VARS = ["PAM_LOG_LEVEL", "PAM_DEBUG", "PAM_LOG_FILE", "PAM_JSON_LOGS", "PAM_RUNS_DIR", "PAM_MAX_PARALLEL_RUNS"]


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    for name in RUNTIME_VARS:
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    return monkeypatch


class TestExperimentConfig:

    def test_defaults(self):
        config = ExperimentConfig()
        assert config.task is TaskName.NGUYEN5
        assert config.population_size == LOCAL_CONFIG["population_size"]
        assert config.tournament_size == 25
        assert config.strategy.kind is StrategyKind.PAM_RT
        assert config.strategy.max_attempts == 64
        assert config.schedule.frequency == 100
        assert config.optimizer.learning_rate == 1e-4

    @pytest.mark.parametrize("task", ["nguyen2", "nguyen12"])
    def test_sample_budget_follows_task(self, task):
        assert ExperimentConfig(task=task).samples == get_task_samples(task)
        assert ExperimentConfig(task=task, total_samples=7).samples == 7

    def test_dotted_overrides(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"task": "nguyen7", "strategy": {"kind": "pam"}}), encoding="utf-8")
        config = load_experiment_config(path, {"strategy.epsilon": 0.2, "seed": 4, "task": None})
        assert config.task is TaskName.NGUYEN7
        assert config.strategy.kind is StrategyKind.PAM
        assert config.strategy.epsilon == 0.2
        assert config.seed == 4

    def test_noisy_oracle_needs_accuracy(self):
        with pytest.raises(ConfigurationError):
            load_experiment_config(overrides={"predictor.mode": "noisy_oracle"})

    def test_oracle_accuracy(self):
        assert PredictorModeConfig(mode=PredictorMode.PERFECT_ORACLE).oracle_accuracy == 1.0
        assert PredictorModeConfig(mode=PredictorMode.NOISY_ORACLE, accuracy=0.7).oracle_accuracy == 0.7
        with pytest.raises(ConfigurationError):
            PredictorModeConfig().oracle_accuracy

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError):
            load_experiment_config(overrides={"strategy.temperature": 1.0})

    def test_graph_dim_mismatch(self):
        with pytest.raises(ConfigurationError):
            load_experiment_config(overrides={"encoder.graph_dim": 32})

    def test_not_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="not valid JSON"):
            load_experiment_config(path)

    def test_digest_ignores_seed_and_out_dir(self):
        base = ExperimentConfig()
        assert base.digest() == ExperimentConfig(seed=9, out_dir="elsewhere").digest()
        assert base.digest() != ExperimentConfig(tournament_size=10).digest()

    def test_shipped_config_loads(self):
        from configs.local_config import PROJECT_ROOT
        config = load_experiment_config(PROJECT_ROOT / "configs" / "nguyen5_pam_rt.json")
        assert config.strategy.kind is StrategyKind.PAM_RT

    def test_unresolved_budget(self, make_config):
        with pytest.raises(ConfigurationError):
            make_config().model_copy(update={"total_samples": None}).samples


class TestRuntimeSettings:

    def test_defaults(self, clean_env):
        settings = load_runtime_settings()
        assert settings.log_level == "INFO"
        assert settings.max_parallel_runs == 4
        assert not settings.debug_mode

    def test_from_environment(self, clean_env):
        clean_env.setenv("PAM_DEBUG", "true")
        clean_env.setenv("PAM_MAX_PARALLEL_RUNS", "8")
        clean_env.setenv("PAM_RUNS_DIR", "/tmp/pam-runs")
        settings = load_runtime_settings()
        assert settings.debug_mode
        assert settings.max_parallel_runs == 8
        assert settings.to_dict()["runs_dir"] == "/tmp/pam-runs"

    def test_env_file(self, clean_env, tmp_path):
        env = tmp_path / "custom.env"
        env.write_text("PAM_LOG_LEVEL=DEBUG\nPAM_JSON_LOGS=1\n", encoding="utf-8")
        settings = load_runtime_settings(env)
        assert settings.log_level == "DEBUG"
        assert settings.json_logs

    @pytest.mark.parametrize("value", ["many", "0"])
    def test_invalid_parallelism(self, clean_env, value):
        clean_env.setenv("PAM_MAX_PARALLEL_RUNS", value)
        with pytest.raises(ConfigurationError):
            load_runtime_settings()

    def test_log_level_is_normalized(self, clean_env):
        clean_env.setenv("PAM_LOG_LEVEL", " warning ")
        assert load_runtime_settings().log_level == "WARNING"

    def test_unknown_log_level(self, clean_env):
        clean_env.setenv("PAM_LOG_LEVEL", "LOUD")
        with pytest.raises(ConfigurationError, match="PAM_LOG_LEVEL"):
            load_runtime_settings()


class TestLogging:

    def test_unknown_level_rejected(self):
        with pytest.raises(ConfigurationError):
            setup_logging("chatty")

    def test_log_file_closed_on_reconfigure(self, tmp_path):
        path = tmp_path / "pam.log"
        setup_logging(log_file=str(path))
        writer = logging_config._active_writer
        get_logger("tests").info("file_event", answer=42)
        setup_logging()
        assert writer._file is None
        assert "file_event" in path.read_text(encoding="utf-8")
