"""Classifiers implemented on numpy/scipy: NB, SGD-linear, MLP, histogram GBDT."""

from mgtdetect.models.base import TrainConfig, predict
from mgtdetect.models.gbdt import GBDTModel, gbdt_fit, gbdt_predict_proba
from mgtdetect.models.linear import (
    LinearModel,
    linear_decision,
    linear_objective,
    linear_proba,
    sgd_fit_linear,
)
from mgtdetect.models.mlp import MLPModel, mlp_fit, mlp_forward, mlp_loss_and_grad
from mgtdetect.models.naive_bayes import NaiveBayesModel, nb_fit, nb_log_posterior

MODEL_CLASSES = {
    "nb": NaiveBayesModel,
    "linear": LinearModel,
    "mlp": MLPModel,
    "gbdt": GBDTModel,
}

__all__ = [
    "GBDTModel",
    "LinearModel",
    "MLPModel",
    "MODEL_CLASSES",
    "NaiveBayesModel",
    "TrainConfig",
    "gbdt_fit",
    "gbdt_predict_proba",
    "linear_decision",
    "linear_objective",
    "linear_proba",
    "mlp_fit",
    "mlp_forward",
    "mlp_loss_and_grad",
    "nb_fit",
    "nb_log_posterior",
    "predict",
    "sgd_fit_linear",
]
