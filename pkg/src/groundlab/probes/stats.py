"""Rank and correlation statistics."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError, UndefinedCorrelationError

Array = np.ndarray


def rankdata(x) -> Array:
    """Fractional ranks starting at 1, ties averaged."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    sx = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def pearson(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ContractError(f"pearson: shapes {a.shape} and {b.shape} must match, 1-d")
    ac = a - a.mean()
    bc = b - b.mean()
    va = (ac * ac).sum()
    vb = (bc * bc).sum()
    if va <= 0.0 or vb <= 0.0:
        raise UndefinedCorrelationError("pearson: zero variance input")
    return float((ac * bc).sum() / np.sqrt(va * vb))


def spearman(x, y) -> float:
    """Pearson correlation of average-tie fractional ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ContractError(f"spearman: shapes {x.shape} and {y.shape} must match, 1-d")
    if len(x) < 3:
        raise ContractError(f"spearman: need >= 3 values, got {len(x)}")
    try:
        return pearson(rankdata(x), rankdata(y))
    except UndefinedCorrelationError:
        raise UndefinedCorrelationError("spearman: zero variance in ranks")
