"""
Graph-encoder predictors: pairwise binary head, regression head, oracles.
"""
from .checkpoint import load_model, model_from_bytes, model_to_bytes, save_model
from .model import (
    BinaryScore,
    LabeledGraph,
    LabeledPair,
    PredictorModel,
    encode,
    encode_graphs,
    loss_and_grad,
    predict_fitness,
    predict_pair,
)
from .optimizer import AdamState, sgd_step
from .scorers import (
    LearnedScorer,
    NoisyOracle,
    PairwiseScorer,
    PredictorHandle,
    RegressionScorer,
    noisy_oracle_predict,
)

__all__ = [
    "load_model",
    "model_from_bytes",
    "model_to_bytes",
    "save_model",
    "BinaryScore",
    "LabeledGraph",
    "LabeledPair",
    "PredictorModel",
    "encode",
    "encode_graphs",
    "loss_and_grad",
    "predict_fitness",
    "predict_pair",
    "AdamState",
    "sgd_step",
    "LearnedScorer",
    "NoisyOracle",
    "PairwiseScorer",
    "PredictorHandle",
    "RegressionScorer",
    "noisy_oracle_predict",
]
