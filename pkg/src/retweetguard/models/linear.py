"""Linear classifiers: multinomial softmax regression and a linear-kernel SVM.

Both operate on standardized inputs with an appended bias column.  The
softmax model runs full-batch gradient descent with Armijo backtracking on
the step size; the SVM runs one-vs-rest hinge-loss subgradient descent with
the classic 1/(lambda*t) schedule, per-epoch seeded shuffling, and a
projection onto the ball of radius 1/sqrt(lambda).
"""

from __future__ import annotations

import math

import numpy as np


def _with_bias(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((len(X), 1))])


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_loss_and_grad(W: np.ndarray, Xb: np.ndarray, Y: np.ndarray,
                          l2: float) -> tuple[float, np.ndarray]:
    """Mean cross-entropy plus (l2/2)*||W||^2 over the non-bias columns.

    ``W`` is (classes, features+1) with the bias in the last column, ``Xb``
    carries the bias column, and ``Y`` is one-hot.  Returns (loss, dL/dW).
    """
    n = len(Xb)
    scores = Xb @ W.T
    log_p = scores - scores.max(axis=1, keepdims=True)
    log_p = log_p - np.log(np.exp(log_p).sum(axis=1, keepdims=True))
    loss = float(-(Y * log_p).sum() / n)
    loss += 0.5 * l2 * float((W[:, :-1] ** 2).sum())

    P = np.exp(log_p)
    grad = (P - Y).T @ Xb / n
    grad[:, :-1] += l2 * W[:, :-1]
    return loss, grad


class SoftmaxRegression:
    def __init__(self, l2: float = 1e-4, max_iter: int = 5000, tol: float = 1e-6,
                 init_step: float = 1.0):
        self.l2 = l2
        self.max_iter = max_iter
        self.tol = tol
        self.init_step = init_step
        self.W: np.ndarray | None = None
        self.n_iter = 0

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int) -> "SoftmaxRegression":
        Xb = _with_bias(X)
        Y = np.zeros((len(y), n_classes))
        Y[np.arange(len(y)), y] = 1.0

        W = np.zeros((n_classes, Xb.shape[1]))
        loss, grad = softmax_loss_and_grad(W, Xb, Y, self.l2)
        step = self.init_step
        for it in range(self.max_iter):
            self.n_iter = it
            gnorm_sq = float((grad * grad).sum())
            if math.sqrt(gnorm_sq) < self.tol:
                break
            step = min(step * 2.0, 1e6)
            while True:
                W_next = W - step * grad
                loss_next, grad_next = softmax_loss_and_grad(W_next, Xb, Y, self.l2)
                if loss_next <= loss - 1e-4 * step * gnorm_sq or step < 1e-14:
                    break
                step /= 2.0
            W, loss, grad = W_next, loss_next, grad_next
        self.W = W
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.W is None:
            raise ValueError("model is not fitted")
        return softmax(_with_bias(X) @ self.W.T)

    def to_dict(self) -> dict:
        return {
            "l2": self.l2,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "init_step": self.init_step,
            "W": self.W.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SoftmaxRegression":
        model = cls(l2=obj["l2"], max_iter=obj["max_iter"], tol=obj["tol"],
                    init_step=obj["init_step"])
        model.W = np.array(obj["W"], dtype=np.float64)
        return model


class LinearSVM:
    """One-vs-rest hinge loss + L2, epoch-based subgradient descent."""

    def __init__(self, l2: float = 1e-4, epochs: int = 30):
        self.l2 = l2
        self.epochs = epochs
        self.W: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int,
            rng: np.random.Generator) -> "LinearSVM":
        Xb = _with_bias(X)
        n, d = Xb.shape
        y_sign = -np.ones((n, n_classes))
        y_sign[np.arange(n), y] = 1.0

        W = np.zeros((n_classes, d))
        radius = 1.0 / math.sqrt(self.l2)
        t = 0
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                t += 1
                eta = 1.0 / (self.l2 * t)
                xi = Xb[i]
                margins = y_sign[i] * (W @ xi)
                W *= 1.0 - eta * self.l2
                violating = margins < 1.0
                if violating.any():
                    W[violating] += (eta * y_sign[i, violating])[:, None] * xi
                norms = np.sqrt((W * W).sum(axis=1))
                over = norms > radius
                if over.any():
                    W[over] *= (radius / norms[over])[:, None]
        self.W = W
        return self

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        if self.W is None:
            raise ValueError("model is not fitted")
        return _with_bias(X) @ self.W.T

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        # Logistic squashing of per-class margins, renormalized.
        squashed = 1.0 / (1.0 + np.exp(-np.clip(self.decision_scores(X), -500, 500)))
        totals = squashed.sum(axis=1, keepdims=True)
        uniform = np.full_like(squashed, 1.0 / squashed.shape[1])
        return np.where(totals > 0, squashed / np.where(totals > 0, totals, 1.0), uniform)

    def to_dict(self) -> dict:
        return {"l2": self.l2, "epochs": self.epochs, "W": self.W.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "LinearSVM":
        model = cls(l2=obj["l2"], epochs=obj["epochs"])
        model.W = np.array(obj["W"], dtype=np.float64)
        return model
