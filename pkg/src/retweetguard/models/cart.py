"""CART decision trees (Gini split criterion) and weighted decision stumps.

Trees are stored as flat parallel arrays so prediction can walk all samples
level-by-level and serialization stays iterative regardless of depth.
"""

from __future__ import annotations

from typing import Optional

import numpy as np


def gini_impurity(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p * p).sum())


def _best_split(X: np.ndarray, y: np.ndarray, n_classes: int,
                feature_indices: np.ndarray):
    """Best (feature, threshold) by Gini gain; None when nothing separates.

    Ties keep the first candidate in ``feature_indices`` order, which makes
    tree construction deterministic for a fixed RNG.
    """
    n = len(y)
    parent_counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    parent_gini = gini_impurity(parent_counts)

    best_gain = 0.0
    best: Optional[tuple[int, float]] = None
    sizes_left = np.arange(1, n, dtype=np.float64)
    sizes_right = n - sizes_left

    for f in feature_indices:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y[order]] = 1.0
        left_counts = np.cumsum(onehot, axis=0)[:-1]
        right_counts = parent_counts - left_counts

        gini_left = 1.0 - ((left_counts / sizes_left[:, None]) ** 2).sum(axis=1)
        gini_right = 1.0 - ((right_counts / sizes_right[:, None]) ** 2).sum(axis=1)
        weighted = (sizes_left * gini_left + sizes_right * gini_right) / n
        weighted[~valid] = np.inf

        i = int(np.argmin(weighted))
        gain = parent_gini - weighted[i]
        if gain > best_gain + 1e-15:
            best_gain = gain
            best = (int(f), float((xs[i] + xs[i + 1]) / 2.0))
    return best


class DecisionTree:
    """Gini CART classifier; optional per-node feature subsampling."""

    def __init__(self, min_samples_split: int = 2, max_depth: Optional[int] = None,
                 max_features: Optional[int] = None):
        self.min_samples_split = min_samples_split
        self.max_depth = max_depth
        self.max_features = max_features
        self.feature: Optional[np.ndarray] = None
        self.threshold: Optional[np.ndarray] = None
        self.left: Optional[np.ndarray] = None
        self.right: Optional[np.ndarray] = None
        self.proba: Optional[np.ndarray] = None

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int,
            rng: Optional[np.random.Generator] = None) -> "DecisionTree":
        n, d = X.shape
        feature, threshold, left, right, proba = [], [], [], [], []

        def new_node() -> int:
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            proba.append(None)
            return len(feature) - 1

        stack = [(new_node(), np.arange(n), 0)]
        while stack:
            nid, idx, depth = stack.pop()
            counts = np.bincount(y[idx], minlength=n_classes).astype(np.float64)
            proba[nid] = counts / counts.sum()

            if (
                len(idx) < self.min_samples_split
                or (self.max_depth is not None and depth >= self.max_depth)
                or np.count_nonzero(counts) <= 1
            ):
                continue

            if self.max_features is not None and self.max_features < d:
                assert rng is not None, "feature subsampling needs an RNG"
                feats = rng.choice(d, size=self.max_features, replace=False)
            else:
                feats = np.arange(d)
            split = _best_split(X[idx], y[idx], n_classes, feats)
            if split is None:
                continue
            f, thr = split
            goes_left = X[idx, f] <= thr
            if goes_left.all() or not goes_left.any():
                continue
            feature[nid] = f
            threshold[nid] = thr
            left_id, right_id = new_node(), new_node()
            left[nid], right[nid] = left_id, right_id
            stack.append((right_id, idx[~goes_left], depth + 1))
            stack.append((left_id, idx[goes_left], depth + 1))

        self.feature = np.array(feature, dtype=np.int64)
        self.threshold = np.array(threshold, dtype=np.float64)
        self.left = np.array(left, dtype=np.int64)
        self.right = np.array(right, dtype=np.int64)
        self.proba = np.array(proba, dtype=np.float64)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.proba is None:
            raise ValueError("tree is not fitted")
        idx = np.zeros(len(X), dtype=np.int64)
        while True:
            active = self.feature[idx] >= 0
            if not active.any():
                break
            rows = np.flatnonzero(active)
            nodes = idx[rows]
            go_left = X[rows, self.feature[nodes]] <= self.threshold[nodes]
            idx[rows] = np.where(go_left, self.left[nodes], self.right[nodes])
        return self.proba[idx]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.predict_proba(X).argmax(axis=1)

    def to_dict(self) -> dict:
        return {
            "min_samples_split": self.min_samples_split,
            "max_depth": self.max_depth,
            "max_features": self.max_features,
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "proba": self.proba.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "DecisionTree":
        tree = cls(
            min_samples_split=obj["min_samples_split"],
            max_depth=obj["max_depth"],
            max_features=obj["max_features"],
        )
        tree.feature = np.array(obj["feature"], dtype=np.int64)
        tree.threshold = np.array(obj["threshold"], dtype=np.float64)
        tree.left = np.array(obj["left"], dtype=np.int64)
        tree.right = np.array(obj["right"], dtype=np.int64)
        tree.proba = np.array(obj["proba"], dtype=np.float64)
        return tree


class WeightedStump:
    """Depth-1 classifier minimizing weighted misclassification error.

    Each side predicts its weighted-majority class; degenerates to a single
    majority label when no feature value separates the samples.
    """

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.left_class = 0
        self.right_class = 0

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int,
            weights: np.ndarray) -> "WeightedStump":
        n, d = X.shape
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y] = 1.0
        weighted = onehot * weights[:, None]
        total = weighted.sum(axis=0)

        best_err = total.sum() - total.max()  # no-split majority stump
        self.feature = -1
        self.left_class = self.right_class = int(np.argmax(total))

        for f in range(d):
            order = np.argsort(X[:, f], kind="stable")
            xs = X[order, f]
            valid = xs[:-1] < xs[1:]
            if not valid.any():
                continue
            left_w = np.cumsum(weighted[order], axis=0)[:-1]
            right_w = total - left_w
            err = (left_w.sum(axis=1) - left_w.max(axis=1)) + (
                right_w.sum(axis=1) - right_w.max(axis=1)
            )
            err[~valid] = np.inf
            i = int(np.argmin(err))
            if err[i] < best_err - 1e-15:
                best_err = float(err[i])
                self.feature = f
                self.threshold = float((xs[i] + xs[i + 1]) / 2.0)
                self.left_class = int(np.argmax(left_w[i]))
                self.right_class = int(np.argmax(right_w[i]))
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.feature < 0:
            return np.full(len(X), self.left_class, dtype=np.int64)
        return np.where(X[:, self.feature] <= self.threshold,
                        self.left_class, self.right_class).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left_class": self.left_class,
            "right_class": self.right_class,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "WeightedStump":
        stump = cls()
        stump.feature = obj["feature"]
        stump.threshold = obj["threshold"]
        stump.left_class = obj["left_class"]
        stump.right_class = obj["right_class"]
        return stump
