"""Retrieval and classification metrics used by the benchmarks."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError

Array = np.ndarray


def map_at_k(scores, truth_nonzero) -> float:
    """Fraction of the k ground-truth features found in the top-k scores.

    k is the ground-truth nonzero count; score ties break by ascending
    feature index.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = set(int(i) for i in truth_nonzero)
    if not truth:
        raise ContractError("map_at_k: empty ground-truth feature set")
    if max(truth) >= scores.shape[0] or min(truth) < 0:
        raise ContractError("map_at_k: ground-truth index outside score vector")
    k = len(truth)
    order = np.lexsort((np.arange(len(scores)), -scores))
    top = set(order[:k].tolist())
    return len(top & truth) / k


def macro_f1(predictions, labels, classes=None, allow_extra_labels=False) -> float:
    """Unweighted mean of per-class F1; absent precision+recall scores 0.

    With an explicit class list, labels outside it are an error unless
    allow_extra_labels is set, in which case such rows still count toward
    false positives of the averaged classes but contribute no class of
    their own.
    """
    predictions = list(predictions)
    labels = list(labels)
    if not labels:
        raise ContractError("macro_f1: empty input")
    if len(predictions) != len(labels):
        raise ContractError(
            f"macro_f1: {len(predictions)} predictions vs {len(labels)} labels"
        )
    if classes is None:
        classes = sorted(set(labels))
    else:
        classes = list(classes)
        missing = set(labels) - set(classes)
        if missing and not allow_extra_labels:
            raise ContractError(f"macro_f1: labels outside class set: {sorted(missing)}")
    f1s = []
    for c in classes:
        tp = sum(1 for p, t in zip(predictions, labels) if p == c and t == c)
        fp = sum(1 for p, t in zip(predictions, labels) if p == c and t != c)
        fn = sum(1 for p, t in zip(predictions, labels) if p != c and t == c)
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(f1s))


def accuracy(predictions, labels) -> float:
    predictions = list(predictions)
    labels = list(labels)
    if not labels:
        raise ContractError("accuracy: empty input")
    return sum(1 for p, t in zip(predictions, labels) if p == t) / len(labels)
