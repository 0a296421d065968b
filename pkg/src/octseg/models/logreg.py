"""L2-regularised logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidHyperparameter, NumericError, SingleClass, WidthMismatch


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    epochs: int = 0
    learning_rate: float = 0.0
    l2: float = 0.0
    final_loss: float = float("nan")

    def to_params(self) -> dict:
        return {
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "l2": self.l2,
            "final_loss": float(self.final_loss),
        }

    @classmethod
    def from_params(cls, p: dict) -> "LogRegModel":
        return cls(np.asarray(p["weights"], dtype=np.float64), float(p["bias"]), int(p["epochs"]),
                   float(p["learning_rate"]), float(p["l2"]), float(p["final_loss"]))


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def loss_and_grad(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float):
    """Mean cross-entropy + (l2/2)*||w||^2 and its gradient ``(dw, db)``."""
    z = X @ w + b
    # log(1 + e^z) - y*z, stable for large |z|
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))
    r = sigmoid(z) - y
    dw = X.T @ r / y.size + l2 * w
    db = float(r.mean())
    return loss, dw, db


def train_logreg(X, y, lr: float = 0.1, epochs: int = 2000, l2: float = 1e-4, seed: int = 0,
                 loss_history: list | None = None) -> LogRegModel:
    """Gradient descent from zero weights (``seed`` is accepted but has nothing to randomise)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] == 0 or np.unique(y).size < 2:
        raise SingleClass("logistic regression needs both classes in the training set")
    if lr <= 0 or epochs < 1 or l2 < 0:
        raise InvalidHyperparameter(f"lr={lr}, epochs={epochs}, l2={l2}")
    w = np.zeros(X.shape[1])
    b = 0.0
    loss = float("nan")
    for _ in range(epochs):
        loss, dw, db = loss_and_grad(w, b, X, y, l2)
        if loss_history is not None:
            loss_history.append(loss)
        w = w - lr * dw
        b = b - lr * db
    loss = loss_and_grad(w, b, X, y, l2)[0]
    if not np.isfinite(loss) or not np.all(np.isfinite(w)):
        raise NumericError("logistic regression diverged")
    return LogRegModel(w, b, epochs, lr, l2, loss)


def predict_proba(model: LogRegModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.weights.size:
        raise WidthMismatch(f"{X.shape[1]} features, model expects {model.weights.size}")
    return sigmoid(X @ model.weights + model.bias)


def predict_logreg(model: LogRegModel, X):
    """``(labels, probabilities)``; probability >= 0.5 is class 1."""
    p = predict_proba(model, X)
    return (p >= 0.5).astype(np.int64), p
