"""Linear support-vector classifier: one-vs-rest, L2-regularized squared
hinge, solved by deterministic full-batch adaptive-moment descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from .metrics import accuracy

Array = np.ndarray

_GRAD_TOL = 1e-5
_MAX_ITER = 30000
_LR = 0.1
_PATIENCE = 200

C_GRID = (0.01, 1.0, 100.0)


@dataclass
class SVCProbe:
    classes: list
    weights: Array  # [n_classes, n_features]
    biases: Array  # [n_classes]
    C: float

    def decision_scores(self, X) -> Array:
        X = np.asarray(X, dtype=np.float64)
        return X @ self.weights.T + self.biases

    def predict(self, X) -> list:
        scores = self.decision_scores(X)
        return [self.classes[i] for i in scores.argmax(axis=1)]


def _fit_binary(X: Array, s: Array, C: float) -> tuple[Array, float]:
    """Minimize 0.5 w.w + C * sum(max(0, 1 - s(xw+b))^2).

    Full-batch adaptive-moment descent; converged when the gradient
    max-norm falls under tolerance. The squared hinge is smooth, so the
    subgradient is the gradient everywhere. Plateaus cut the step size so
    the iterate settles instead of orbiting the optimum.
    """
    n, d = X.shape
    theta = np.zeros(d + 1)  # [w; b]
    m = np.zeros(d + 1)
    v = np.zeros(d + 1)
    b1, b2, eps = 0.9, 0.999, 1e-8
    lr = _LR
    grad_tol = _GRAD_TOL * max(1.0, C)
    best = np.inf
    stale = 0
    for t in range(1, _MAX_ITER + 1):
        w, b = theta[:-1], theta[-1]
        viol = np.maximum(0.0, 1.0 - s * (X @ w + b))
        obj = 0.5 * (w * w).sum() + C * (viol * viol).sum()
        g = np.concatenate(
            [w - 2.0 * C * (X.T @ (s * viol)), [-2.0 * C * (s * viol).sum()]]
        )
        if np.abs(g).max() < grad_tol:
            break
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        theta = theta - lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
        if obj < best - 1e-12:
            best = obj
            stale = 0
        else:
            stale += 1
            if stale >= _PATIENCE:
                lr *= 0.5
                stale = 0
                if lr < 1e-7:
                    break
    return theta[:-1], theta[-1]


def fit_svc(X, labels, C: float = 1.0) -> SVCProbe:
    """One-vs-rest squared-hinge linear classifiers at regularization C."""
    X = np.asarray(X, dtype=np.float64)
    labels = list(labels)
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ContractError(f"fit_svc: need >= 2 classes, got {classes}")
    if X.shape[0] != len(labels):
        raise ContractError(f"fit_svc: {X.shape[0]} rows vs {len(labels)} labels")
    weights = np.zeros((len(classes), X.shape[1]))
    biases = np.zeros(len(classes))
    for i, c in enumerate(classes):
        s = np.where(np.asarray([lab == c for lab in labels]), 1.0, -1.0)
        weights[i], biases[i] = _fit_binary(X, s, C)
    return SVCProbe(classes=classes, weights=weights, biases=biases, C=C)


def grid_select_svc(
    X_train, y_train, X_val, y_val, C_grid=C_GRID
) -> tuple[SVCProbe, float, float]:
    """Fit at every C; return (probe, C, val accuracy) of the best C.

    Ties prefer the smallest C for reproducibility.
    """
    best = None
    for C in C_grid:
        probe = fit_svc(X_train, y_train, C)
        acc = accuracy(probe.predict(X_val), y_val)
        if best is None or acc > best[2]:
            best = (probe, C, acc)
    return best
