"""Tree ensembles: random forest, bagging, and AdaBoost.M1."""

from __future__ import annotations

import numpy as np

from .cart import DecisionTree, WeightedStump


def _bootstrap(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, n, size=n)


class RandomForest:
    """Bagged Gini trees voting with per-tree feature subsampling."""

    def __init__(self, n_trees: int = 100, max_features: int = 8):
        self.n_trees = n_trees
        self.max_features = max_features
        self.trees: list[DecisionTree] = []
        self.n_classes = 0

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int,
            rng: np.random.Generator) -> "RandomForest":
        self.n_classes = n_classes
        self.trees = []
        m = min(self.max_features, X.shape[1])
        for _ in range(self.n_trees):
            idx = _bootstrap(rng, len(X))
            tree = DecisionTree(max_features=m)
            tree.fit(X[idx], y[idx], n_classes, rng=rng)
            self.trees.append(tree)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise ValueError("model is not fitted")
        votes = np.zeros((len(X), self.n_classes))
        for tree in self.trees:
            pred = tree.predict(X)
            votes[np.arange(len(X)), pred] += 1.0
        return votes / self.n_trees

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_features": self.max_features,
            "n_classes": self.n_classes,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RandomForest":
        model = cls(n_trees=obj["n_trees"], max_features=obj["max_features"])
        model.n_classes = obj["n_classes"]
        model.trees = [DecisionTree.from_dict(t) for t in obj["trees"]]
        return model


class Bagging:
    """Bootstrap-aggregated full CART trees, majority vote."""

    def __init__(self, n_trees: int = 50):
        self.n_trees = n_trees
        self.trees: list[DecisionTree] = []
        self.n_classes = 0

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int,
            rng: np.random.Generator) -> "Bagging":
        self.n_classes = n_classes
        self.trees = []
        for _ in range(self.n_trees):
            idx = _bootstrap(rng, len(X))
            tree = DecisionTree()
            tree.fit(X[idx], y[idx], n_classes)
            self.trees.append(tree)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise ValueError("model is not fitted")
        votes = np.zeros((len(X), self.n_classes))
        for tree in self.trees:
            pred = tree.predict(X)
            votes[np.arange(len(X)), pred] += 1.0
        return votes / self.n_trees

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "n_classes": self.n_classes,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Bagging":
        model = cls(n_trees=obj["n_trees"])
        model.n_classes = obj["n_classes"]
        model.trees = [DecisionTree.from_dict(t) for t in obj["trees"]]
        return model


class AdaBoostM1:
    """AdaBoost.M1 over depth-1 weighted stumps.

    Rounds stop early when the weighted error reaches 0.5; a zero-error
    stump gets a large fixed weight and ends the loop.
    """

    LARGE_ALPHA = 35.0

    def __init__(self, n_rounds: int = 100):
        self.n_rounds = n_rounds
        self.stumps: list[WeightedStump] = []
        self.alphas: list[float] = []
        self.n_classes = 0

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int) -> "AdaBoostM1":
        self.n_classes = n_classes
        self.stumps = []
        self.alphas = []
        n = len(X)
        weights = np.full(n, 1.0 / n)
        for _ in range(self.n_rounds):
            stump = WeightedStump().fit(X, y, n_classes, weights)
            pred = stump.predict(X)
            miss = pred != y
            eps = float(weights[miss].sum())
            if eps >= 0.5:
                if not self.stumps:
                    # keep one stump so the model is usable at all
                    self.stumps.append(stump)
                    self.alphas.append(1.0)
                break
            if eps <= 0.0:
                self.stumps.append(stump)
                self.alphas.append(self.LARGE_ALPHA)
                break
            alpha = float(np.log((1.0 - eps) / eps))
            self.stumps.append(stump)
            self.alphas.append(alpha)
            weights = weights * np.exp(alpha * miss)
            weights /= weights.sum()
        return self

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        if not self.stumps:
            raise ValueError("model is not fitted")
        scores = np.zeros((len(X), self.n_classes))
        for alpha, stump in zip(self.alphas, self.stumps):
            pred = stump.predict(X)
            scores[np.arange(len(X)), pred] += alpha
        return scores

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.decision_scores(X), axis=1)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        scores = self.decision_scores(X)
        p = 1.0 / (1.0 + np.exp(-np.clip(scores, -500.0, 500.0)))
        totals = p.sum(axis=1, keepdims=True)
        uniform = np.full_like(p, 1.0 / self.n_classes)
        with np.errstate(invalid="ignore"):
            out = np.where(totals > 0.0, p / totals, uniform)
        return out

    def to_dict(self) -> dict:
        return {
            "n_rounds": self.n_rounds,
            "n_classes": self.n_classes,
            "alphas": list(self.alphas),
            "stumps": [s.to_dict() for s in self.stumps],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "AdaBoostM1":
        model = cls(n_rounds=obj["n_rounds"])
        model.n_classes = obj["n_classes"]
        model.alphas = [float(a) for a in obj["alphas"]]
        model.stumps = [WeightedStump.from_dict(s) for s in obj["stumps"]]
        return model
