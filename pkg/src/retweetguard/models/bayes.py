"""Gaussian naive Bayes with a per-feature variance floor."""

from __future__ import annotations

import numpy as np


class GaussianNaiveBayes:
    def __init__(self, var_floor: float = 1e-9):
        self.var_floor = var_floor
        self.means: np.ndarray | None = None
        self.variances: np.ndarray | None = None
        self.log_priors: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int) -> "GaussianNaiveBayes":
        d = X.shape[1]
        self.means = np.zeros((n_classes, d))
        self.variances = np.ones((n_classes, d))
        priors = np.zeros(n_classes)
        for c in range(n_classes):
            rows = X[y == c]
            priors[c] = len(rows) / len(X)
            if len(rows):
                self.means[c] = rows.mean(axis=0)
                self.variances[c] = np.maximum(rows.var(axis=0), self.var_floor)
        self.log_priors = np.log(np.maximum(priors, 1e-300))
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.means is None:
            raise ValueError("model is not fitted")
        # log joint per class, normalized with the log-sum-exp trick
        diff = X[:, None, :] - self.means[None, :, :]
        log_lik = -0.5 * (
            np.log(2.0 * np.pi * self.variances)[None, :, :]
            + diff * diff / self.variances[None, :, :]
        ).sum(axis=2)
        log_joint = log_lik + self.log_priors[None, :]
        log_joint -= log_joint.max(axis=1, keepdims=True)
        p = np.exp(log_joint)
        return p / p.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {
            "var_floor": self.var_floor,
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "log_priors": self.log_priors.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GaussianNaiveBayes":
        model = cls(var_floor=obj["var_floor"])
        model.means = np.array(obj["means"], dtype=np.float64)
        model.variances = np.array(obj["variances"], dtype=np.float64)
        model.log_priors = np.array(obj["log_priors"], dtype=np.float64)
        return model
