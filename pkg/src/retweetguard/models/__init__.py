"""Classifiers over behavioral feature vectors."""

from .base import (
    CLASS_MODES,
    DEFAULT_HYPERPARAMETERS,
    KINDS,
    ModelSpec,
    TrainedModel,
    normalize_class_mode,
    normalize_kind,
    predict,
    predict_batch,
    train,
)
from .bayes import GaussianNaiveBayes
from .cart import DecisionTree, WeightedStump, gini_impurity
from .ensemble import AdaBoostM1, Bagging, RandomForest
from .knn import KNearestNeighbors
from .linear import LinearSVM, SoftmaxRegression, softmax_loss_and_grad
from .persist import (
    FORMAT_VERSION,
    ModelFileError,
    load_model,
    model_from_payload,
    model_to_payload,
    save_model,
)

__all__ = [
    "AdaBoostM1",
    "Bagging",
    "CLASS_MODES",
    "DEFAULT_HYPERPARAMETERS",
    "DecisionTree",
    "FORMAT_VERSION",
    "GaussianNaiveBayes",
    "KINDS",
    "KNearestNeighbors",
    "LinearSVM",
    "ModelFileError",
    "ModelSpec",
    "RandomForest",
    "SoftmaxRegression",
    "TrainedModel",
    "WeightedStump",
    "gini_impurity",
    "load_model",
    "model_from_payload",
    "model_to_payload",
    "normalize_class_mode",
    "normalize_kind",
    "predict",
    "predict_batch",
    "save_model",
    "softmax_loss_and_grad",
    "train",
]
