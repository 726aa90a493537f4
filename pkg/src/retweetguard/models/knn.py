"""K-nearest-neighbors on the standardized training set (Euclidean metric)."""

from __future__ import annotations

import numpy as np


class KNearestNeighbors:
    """Memorizes the training set; probabilities are neighbor vote fractions.

    Distance ties resolve toward the lowest training index and vote ties
    toward the lowest class index, so predictions are deterministic.
    """

    def __init__(self, n_neighbors: int = 5):
        self.n_neighbors = n_neighbors
        self.X: np.ndarray | None = None
        self.y: np.ndarray | None = None
        self.n_classes = 0

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int) -> "KNearestNeighbors":
        self.X = X.copy()
        self.y = y.copy()
        self.n_classes = n_classes
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.X is None:
            raise ValueError("model is not fitted")
        k = min(self.n_neighbors, len(self.X))
        train_sq = (self.X * self.X).sum(axis=1)
        out = np.empty((len(X), self.n_classes))
        chunk = 512
        for start in range(0, len(X), chunk):
            q = X[start:start + chunk]
            d2 = (q * q).sum(axis=1)[:, None] + train_sq[None, :] - 2.0 * (q @ self.X.T)
            nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
            votes = self.y[nearest]
            counts = np.stack(
                [np.bincount(row, minlength=self.n_classes) for row in votes]
            )
            out[start:start + chunk] = counts / k
        return out

    def to_dict(self) -> dict:
        return {
            "n_neighbors": self.n_neighbors,
            "n_classes": self.n_classes,
            "X": self.X.tolist(),
            "y": self.y.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "KNearestNeighbors":
        model = cls(n_neighbors=obj["n_neighbors"])
        model.n_classes = obj["n_classes"]
        model.X = np.array(obj["X"], dtype=np.float64)
        model.y = np.array(obj["y"], dtype=np.int64)
        return model
