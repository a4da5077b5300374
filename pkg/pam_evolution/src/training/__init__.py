"""
Replay buffer, predictor training and the online evolution loop.
"""
from .online import OnlineEvolution, OnlineResult, RunStreams, StepObserver, online_loop
from .replay import ReplayBuffer, ReplayRecord, make_epoch_examples, make_epoch_pairs
from .run_log import LOG_COLUMNS, SCHEMA_VERSION, RunRecord, parse_log_csv, render_log_csv
from .trainer import TrainingReport, pair_accuracy, train_predictor

__all__ = [
    "OnlineEvolution",
    "OnlineResult",
    "RunStreams",
    "StepObserver",
    "online_loop",
    "ReplayBuffer",
    "ReplayRecord",
    "make_epoch_examples",
    "make_epoch_pairs",
    "LOG_COLUMNS",
    "SCHEMA_VERSION",
    "RunRecord",
    "parse_log_csv",
    "render_log_csv",
    "TrainingReport",
    "pair_accuracy",
    "train_predictor",
]
