"""Closed-form ridge regression on centered data."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError

Array = np.ndarray


@dataclass
class RidgeModel:
    x_mean: Array
    y_mean: Array
    coef: Array  # [n_features, n_targets]


def fit_ridge(X, Y, lam: float = 1.0) -> RidgeModel:
    """Solve (Xc'Xc + lam I) coef = Xc'Yc; lam=0 with a singular system
    falls back to the least-squares solution with a warning."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if lam < 0:
        raise ContractError(f"fit_ridge: lambda must be >= 0, got {lam}")
    if X.shape[0] != Y.shape[0]:
        raise ContractError(f"fit_ridge: {X.shape[0]} rows vs {Y.shape[0]} targets")
    x_mean = X.mean(axis=0)
    y_mean = Y.mean(axis=0)
    Xc = X - x_mean
    Yc = Y - y_mean
    gram = Xc.T @ Xc + lam * np.eye(X.shape[1])
    rhs = Xc.T @ Yc
    try:
        if lam == 0.0 and np.linalg.matrix_rank(gram) < gram.shape[0]:
            raise np.linalg.LinAlgError("singular")
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        warnings.warn("fit_ridge: singular system at lambda=0; using least squares")
        coef = np.linalg.lstsq(Xc, Yc, rcond=None)[0]
    return RidgeModel(x_mean=x_mean, y_mean=y_mean, coef=coef)


def predict_ridge(model: RidgeModel, X) -> Array:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    return (X - model.x_mean) @ model.coef + model.y_mean
