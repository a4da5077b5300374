"""
Experiment configuration models and runtime settings.

Experiment settings are pydantic models validated before any work starts;
runtime settings (logging, parallelism, default paths) come from the
environment, optionally loaded from a ``.env`` file.
"""
import hashlib
import json
import os
from dataclasses import dataclass, asdict
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from configs.local_config import LOCAL_CONFIG, get_task_samples
from ..exceptions import ConfigurationError
from .logging_config import LOG_LEVELS


class TaskName(str, Enum):
    """Symbolic-regression benchmark tasks."""
    NGUYEN2 = "nguyen2"
    NGUYEN3 = "nguyen3"
    NGUYEN5 = "nguyen5"
    NGUYEN7 = "nguyen7"
    NGUYEN12 = "nguyen12"


class StrategyKind(str, Enum):
    """Mutation strategies."""
    VANILLA = "vanilla"
    PAM = "pam"
    PAM_RT = "pam_rt"
    MAX_PAIRWISE = "max_pairwise"


class PredictorMode(str, Enum):
    """Where pairwise judgements come from."""
    LEARNED = "learned"
    NOISY_ORACLE = "noisy_oracle"
    PERFECT_ORACLE = "perfect_oracle"


class HeadKind(str, Enum):
    """Predictor output head."""
    BINARY = "binary"
    REGRESSION = "regression"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class EncoderConfig(_Section):
    """Message-passing encoder dimensions."""
    node_embed_dim: int = Field(default=LOCAL_CONFIG["node_embed_dim"], gt=0)
    edge_embed_dim: int = Field(default=LOCAL_CONFIG["edge_embed_dim"], gt=0)
    hidden_dim: int = Field(default=LOCAL_CONFIG["hidden_dim"], gt=0)
    num_layers: int = Field(default=LOCAL_CONFIG["num_layers"], gt=0)
    graph_dim: int = Field(default=LOCAL_CONFIG["graph_dim"], gt=0)

    @model_validator(mode="after")
    def _pooling_width(self) -> "EncoderConfig":
        if self.graph_dim != self.hidden_dim:
            raise ValueError(
                f"graph_dim ({self.graph_dim}) must equal hidden_dim ({self.hidden_dim}); "
                "the graph embedding is a sum over final node states"
            )
        return self


class TrainSchedule(_Section):
    """When and how much the predictor trains."""
    frequency: int = Field(default=LOCAL_CONFIG["train_frequency"], ge=1)
    epochs_per_trigger: int = Field(default=LOCAL_CONFIG["epochs_per_trigger"], ge=1)
    min_data: int = Field(default=LOCAL_CONFIG["min_data"], ge=0)
    batch_size: int = Field(default=LOCAL_CONFIG["batch_size"], ge=1)


class OptimizerConfig(_Section):
    """Adaptive-moment optimizer with decoupled weight decay."""
    learning_rate: float = Field(default=LOCAL_CONFIG["learning_rate"], gt=0.0)
    weight_decay: float = Field(default=LOCAL_CONFIG["weight_decay"], ge=0.0)
    beta1: float = Field(default=LOCAL_CONFIG["beta1"], ge=0.0, lt=1.0)
    beta2: float = Field(default=LOCAL_CONFIG["beta2"], ge=0.0, lt=1.0)
    eps: float = Field(default=LOCAL_CONFIG["adam_eps"], gt=0.0)


class StrategyConfig(_Section):
    """Mutation strategy selection."""
    kind: StrategyKind = StrategyKind.PAM_RT
    max_attempts: int = Field(default=LOCAL_CONFIG["max_attempts"], ge=1)
    epsilon: float = Field(default=LOCAL_CONFIG["epsilon"], ge=0.0, le=1.0)
    pairwise_list_size: int = Field(default=LOCAL_CONFIG["pairwise_list_size"], ge=2)


class PredictorModeConfig(_Section):
    """Learned predictor or simulated oracle."""
    mode: PredictorMode = PredictorMode.LEARNED
    accuracy: Optional[float] = Field(default=None, ge=0.5, le=1.0)

    @model_validator(mode="after")
    def _accuracy_for_oracle(self) -> "PredictorModeConfig":
        if self.mode is PredictorMode.NOISY_ORACLE and self.accuracy is None:
            raise ValueError("noisy_oracle mode requires an accuracy in [0.5, 1]")
        return self

    @property
    def oracle_accuracy(self) -> float:
        """Accuracy of the oracle this mode simulates."""
        if self.mode is PredictorMode.PERFECT_ORACLE:
            return 1.0
        if self.accuracy is None:
            raise ConfigurationError("learned predictor has no oracle accuracy")
        return self.accuracy


class ExperimentConfig(BaseModel):
    """Complete configuration of one evolution run."""
    model_config = ConfigDict(extra="forbid")

    task: TaskName = TaskName.NGUYEN5
    seed: int = Field(default=0, ge=0)
    population_size: int = Field(default=LOCAL_CONFIG["population_size"], ge=1)
    tournament_size: int = Field(default=LOCAL_CONFIG["tournament_size"], ge=1)
    total_samples: Optional[int] = Field(default=None, ge=0)
    fec: bool = LOCAL_CONFIG["fec"]
    strategy: StrategyConfig = Field(default_factory=StrategyConfig)
    predictor: PredictorModeConfig = Field(default_factory=PredictorModeConfig)
    encoder: EncoderConfig = Field(default_factory=EncoderConfig)
    schedule: TrainSchedule = Field(default_factory=TrainSchedule)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    replay_capacity: int = Field(default=LOCAL_CONFIG["replay_capacity"], ge=2)
    max_slots: int = Field(default=LOCAL_CONFIG["max_slots"], ge=3)
    checkpoint_every: int = Field(default=LOCAL_CONFIG["checkpoint_every"], ge=0)
    out_dir: str = "runs/default"

    @model_validator(mode="after")
    def _resolve_budget(self) -> "ExperimentConfig":
        if self.total_samples is None:
            self.total_samples = get_task_samples(self.task.value)
        return self

    @property
    def samples(self) -> int:
        """Resolved sample budget."""
        if self.total_samples is None:
            raise ConfigurationError("total_samples was never resolved")
        return self.total_samples

    def digest(self) -> str:
        """Short digest of the configuration, seed and output directory excluded."""
        payload = self.model_dump(mode="json", exclude={"seed", "out_dir"})
        encoded = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.blake2b(encoded, digest_size=8).hexdigest()


def load_experiment_config(
    path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """
    Load an experiment configuration from a JSON file and apply overrides.

    Args:
        path: Optional JSON config file
        overrides: Dotted-key overrides, e.g. ``{"strategy.kind": "pam"}``

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigurationError: If the file is missing or the result is invalid
    """
    data: Dict[str, Any] = {}
    if path is not None:
        if not path.exists():
            raise ConfigurationError(f"Configuration file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Configuration file is not valid JSON: {path}", {"error": str(e)})

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        target = data
        *parents, leaf = key.split(".")
        for part in parents:
            target = target.setdefault(part, {})
        target[leaf] = value

    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError("Invalid experiment configuration", {"errors": e.errors(include_url=False)})


@dataclass
class RuntimeSettings:
    """Process-level settings read from the environment."""
    log_level: str = "INFO"
    debug_mode: bool = False
    log_file: Optional[str] = None
    json_logs: bool = False
    runs_dir: Path = Path("runs")
    max_parallel_runs: int = 4

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format."""
        data = asdict(self)
        data["runs_dir"] = str(self.runs_dir)
        return data


def _env_flag(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).strip().lower() in {"1", "true", "yes", "on"}


def load_runtime_settings(env_file: Optional[Path] = None) -> RuntimeSettings:
    """
    Read runtime settings from the environment (and a ``.env`` file if present).

    Raises:
        ConfigurationError: If the log level is unknown or a numeric setting
            cannot be parsed
    """
    load_dotenv(dotenv_path=env_file, override=False)
    log_level = os.getenv("PAM_LOG_LEVEL", "INFO").strip().upper()
    if log_level not in LOG_LEVELS:
        raise ConfigurationError(f"PAM_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {log_level!r}")
    try:
        max_parallel = int(os.getenv("PAM_MAX_PARALLEL_RUNS", "4"))
    except ValueError as e:
        raise ConfigurationError("PAM_MAX_PARALLEL_RUNS must be an integer", {"error": str(e)})
    if max_parallel < 1:
        raise ConfigurationError(f"PAM_MAX_PARALLEL_RUNS must be positive, got {max_parallel}")

    return RuntimeSettings(
        log_level=log_level,
        debug_mode=_env_flag("PAM_DEBUG"),
        log_file=os.getenv("PAM_LOG_FILE") or None,
        json_logs=_env_flag("PAM_JSON_LOGS"),
        runs_dir=Path(os.getenv("PAM_RUNS_DIR", "runs")),
        max_parallel_runs=max_parallel,
    )
