"""Partial least squares regression via NIPALS with deflation.

Data are centered; components are extracted one at a time by the iterative
power method on the X/Y cross-covariance, both blocks deflated by the score
vector. The regression matrix combines weights, loadings, and Y-loadings, so
prediction is a single centered linear map.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError

Array = np.ndarray

_CONV_TOL = 1e-12
_MAX_ITER = 500
_RANK_EPS = 1e-12


@dataclass
class PLSModel:
    x_mean: Array
    y_mean: Array
    coef: Array  # [n_kept_features, n_targets]
    keep: Array  # boolean mask of retained X columns
    n_components: int  # effective component count after clamping


def fit_pls(X, Y, n_components: int = 100) -> PLSModel:
    """NIPALS PLS2 on centered data.

    Requests beyond the achievable rank are clamped with a warning;
    zero-variance X columns are dropped with a warning.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, d = X.shape
    if n < 2:
        raise ContractError(f"fit_pls: need >= 2 samples, got {n}")
    if n_components < 1:
        raise ContractError(f"fit_pls: n_components must be >= 1, got {n_components}")
    if Y.shape[0] != n:
        raise ContractError(f"fit_pls: X has {n} rows but Y has {Y.shape[0]}")

    keep = X.std(axis=0) > 0.0
    if not keep.all():
        warnings.warn(
            f"fit_pls: dropping {int((~keep).sum())} zero-variance feature column(s)"
        )
    Xk = X[:, keep]
    x_mean = Xk.mean(axis=0)
    y_mean = Y.mean(axis=0)
    Xr = Xk - x_mean
    Yr = Y - y_mean

    max_comp = min(n_components, n - 1, Xk.shape[1])
    if max_comp < n_components:
        warnings.warn(
            f"fit_pls: clamping n_components from {n_components} to {max_comp}"
        )

    W, P, C = [], [], []
    for _ in range(max_comp):
        if np.abs(Xr).max() < _RANK_EPS:
            warnings.warn("fit_pls: X residual exhausted; stopping early")
            break
        # start u at the Y column with the most residual variance
        u = Yr[:, int(np.argmax((Yr * Yr).sum(axis=0)))]
        if (u * u).sum() < _RANK_EPS:
            break
        w = np.zeros(Xr.shape[1])
        for _ in range(_MAX_ITER):
            w_new = Xr.T @ u
            norm = np.linalg.norm(w_new)
            if norm < _RANK_EPS:
                break
            w_new /= norm
            t = Xr @ w_new
            tt = (t * t).sum()
            if tt < _RANK_EPS:
                break
            c = Yr.T @ t / tt
            cc = (c * c).sum()
            if cc < _RANK_EPS:
                break
            u_new = Yr @ c / cc
            delta = np.linalg.norm(w_new - w)
            w, u = w_new, u_new
            if delta < _CONV_TOL:
                break
        t = Xr @ w
        tt = (t * t).sum()
        if tt < _RANK_EPS:
            warnings.warn("fit_pls: degenerate score vector; stopping early")
            break
        p = Xr.T @ t / tt
        c = Yr.T @ t / tt
        Xr = Xr - np.outer(t, p)
        Yr = Yr - np.outer(t, c)
        W.append(w)
        P.append(p)
        C.append(c)

    if not W:
        raise ContractError("fit_pls: no usable components (X has no variance)")
    Wm = np.column_stack(W)
    Pm = np.column_stack(P)
    Cm = np.column_stack(C)
    # X (centered) -> scores T = X W (P'W)^-1, prediction = T C'
    coef = Wm @ np.linalg.solve(Pm.T @ Wm, Cm.T)
    return PLSModel(
        x_mean=x_mean, y_mean=y_mean, coef=coef, keep=keep, n_components=Wm.shape[1]
    )


def predict_pls(model: PLSModel, X) -> Array:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.keep.shape[0]:
        raise ContractError(
            f"predict_pls: expected {model.keep.shape[0]} features, got {X.shape[1]}"
        )
    Xc = X[:, model.keep] - model.x_mean
    return Xc @ model.coef + model.y_mean
