"""Model specs, shared standardization, training and prediction.

Every classifier trains on features standardized with training-split
statistics and reports a confidence vector that sums to one. All
randomness (bootstrap draws, shuffling, feature subsampling) comes from
one generator seeded by the spec, so identical spec + data + seed gives
identical learned parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from ..corpus import format_timestamp
from .bayes import GaussianNaiveBayes
from .cart import DecisionTree
from .ensemble import AdaBoostM1, Bagging, RandomForest
from .knn import KNearestNeighbors
from .linear import LinearSVM, SoftmaxRegression

KINDS = (
    "decision_tree",
    "knn",
    "logistic_regression",
    "naive_bayes",
    "linear_svm",
    "random_forest",
    "bagging",
    "boosting",
)

CLASS_MODES = ("binary", "four_class")

DEFAULT_HYPERPARAMETERS: dict[str, dict] = {
    "decision_tree": {"min_samples_split": 2},
    "knn": {"n_neighbors": 5},
    "logistic_regression": {"l2": 1e-4, "max_iter": 5000, "tol": 1e-6},
    "naive_bayes": {"var_floor": 1e-9},
    "linear_svm": {"l2": 1e-4, "epochs": 30},
    "random_forest": {"n_trees": 100, "max_features": 8},
    "bagging": {"n_trees": 50},
    "boosting": {"n_rounds": 100},
}

_INT_PARAMS = {
    "min_samples_split", "n_neighbors", "max_iter", "epochs",
    "n_trees", "max_features", "n_rounds",
}
_MIN_VALUE = {
    "min_samples_split": 2, "n_neighbors": 1, "max_iter": 1, "epochs": 1,
    "n_trees": 1, "max_features": 1, "n_rounds": 1,
}


def normalize_kind(kind: str) -> str:
    """Accept both snake_case names and CamelCase aliases like LinearSVM."""
    folded = kind.strip().lower().replace("_", "").replace("-", "")
    for canonical in KINDS:
        if folded == canonical.replace("_", ""):
            return canonical
    raise ValueError(f"unknown model kind: {kind!r}")


def normalize_class_mode(mode: str) -> str:
    folded = mode.strip().lower().replace("_", "").replace("-", "")
    for canonical in CLASS_MODES:
        if folded == canonical.replace("_", ""):
            return canonical
    raise ValueError(f"unknown class mode: {mode!r}")


def _validated_hyperparameters(kind: str, overrides: Optional[dict]) -> dict:
    params = dict(DEFAULT_HYPERPARAMETERS[kind])
    for name, value in (overrides or {}).items():
        if name not in params:
            raise ValueError(f"unknown hyperparameter for {kind}: {name!r}")
        if name in _INT_PARAMS:
            if int(value) != value or int(value) < _MIN_VALUE[name]:
                raise ValueError(f"{name} must be an integer >= {_MIN_VALUE[name]}")
            params[name] = int(value)
        else:
            if not (float(value) > 0.0):
                raise ValueError(f"{name} must be positive")
            params[name] = float(value)
    return params


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    class_mode: str = "binary"
    random_seed: int = 7
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        object.__setattr__(self, "class_mode", normalize_class_mode(self.class_mode))
        object.__setattr__(
            self, "hyperparameters",
            _validated_hyperparameters(self.kind, self.hyperparameters),
        )
        if int(self.random_seed) != self.random_seed:
            raise ValueError("random_seed must be an integer")
        object.__setattr__(self, "random_seed", int(self.random_seed))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "class_mode": self.class_mode,
            "random_seed": self.random_seed,
            "hyperparameters": dict(self.hyperparameters),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelSpec":
        return cls(
            kind=obj["kind"],
            class_mode=obj["class_mode"],
            random_seed=obj["random_seed"],
            hyperparameters=obj.get("hyperparameters") or {},
        )


@dataclass(frozen=True)
class TrainedModel:
    """Immutable fitted classifier: spec, scaler, class order, learner."""

    spec: ModelSpec
    classes: tuple
    scaler_mean: np.ndarray
    scaler_std: np.ndarray
    learner: object
    imputed_influence: Optional[float] = None
    trained_at: str = ""

    @property
    def n_features(self) -> int:
        return len(self.scaler_mean)


_LEARNER_CLASSES = {
    "decision_tree": DecisionTree,
    "knn": KNearestNeighbors,
    "logistic_regression": SoftmaxRegression,
    "naive_bayes": GaussianNaiveBayes,
    "linear_svm": LinearSVM,
    "random_forest": RandomForest,
    "bagging": Bagging,
    "boosting": AdaBoostM1,
}


def learner_class(kind: str):
    return _LEARNER_CLASSES[kind]


def _fit_learner(spec: ModelSpec, Xs: np.ndarray, y_idx: np.ndarray,
                 n_classes: int, rng: np.random.Generator):
    hp = spec.hyperparameters
    kind = spec.kind
    if kind == "decision_tree":
        return DecisionTree(min_samples_split=hp["min_samples_split"]).fit(
            Xs, y_idx, n_classes)
    if kind == "knn":
        return KNearestNeighbors(n_neighbors=hp["n_neighbors"]).fit(
            Xs, y_idx, n_classes)
    if kind == "logistic_regression":
        return SoftmaxRegression(l2=hp["l2"], max_iter=hp["max_iter"],
                                 tol=hp["tol"]).fit(Xs, y_idx, n_classes)
    if kind == "naive_bayes":
        return GaussianNaiveBayes(var_floor=hp["var_floor"]).fit(
            Xs, y_idx, n_classes)
    if kind == "linear_svm":
        return LinearSVM(l2=hp["l2"], epochs=hp["epochs"]).fit(
            Xs, y_idx, n_classes, rng)
    if kind == "random_forest":
        return RandomForest(n_trees=hp["n_trees"],
                            max_features=hp["max_features"]).fit(
            Xs, y_idx, n_classes, rng)
    if kind == "bagging":
        return Bagging(n_trees=hp["n_trees"]).fit(Xs, y_idx, n_classes, rng)
    if kind == "boosting":
        return AdaBoostM1(n_rounds=hp["n_rounds"]).fit(Xs, y_idx, n_classes)
    raise ValueError(f"unknown model kind: {kind!r}")


def train(spec: ModelSpec, X: np.ndarray, y: Sequence,
          imputed_influence: Optional[float] = None,
          trained_at: Optional[str] = None) -> TrainedModel:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    if len(X) != len(y):
        raise ValueError(f"X has {len(X)} rows but y has {len(y)} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")

    classes = tuple(sorted({label.item() if isinstance(label, np.generic)
                            else label for label in y}))
    if len(classes) < 2:
        raise ValueError("training labels must contain at least 2 classes")
    class_index = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([class_index[label.item() if isinstance(label, np.generic)
                                  else label] for label in y], dtype=np.int64)

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)  # constant features pass through
    Xs = (X - mean) / std

    rng = np.random.default_rng(spec.random_seed)
    learner = _fit_learner(spec, Xs, y_idx, len(classes), rng)
    when = trained_at if trained_at is not None else format_timestamp(
        datetime.now(timezone.utc).replace(microsecond=0))
    return TrainedModel(spec=spec, classes=classes, scaler_mean=mean,
                        scaler_std=std, learner=learner,
                        imputed_influence=imputed_influence, trained_at=when)


def predict_batch(model: TrainedModel, X: np.ndarray) -> tuple[list, np.ndarray]:
    """Classify rows of X; returns (labels, confidence matrix)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"expected {model.n_features} features, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    Xs = (X - model.scaler_mean) / model.scaler_std
    proba = model.learner.predict_proba(Xs)
    labels = [model.classes[i] for i in np.argmax(proba, axis=1)]
    return labels, proba


def predict(model: TrainedModel, x: np.ndarray):
    """Classify one vector; returns (label, confidence vector)."""
    labels, proba = predict_batch(model, np.asarray(x, dtype=np.float64)[None, :])
    return labels[0], proba[0]
