"""Predict measured response vectors from sentence representations."""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import ContractError, UndefinedCorrelationError
from ..probes.ridge import fit_ridge, predict_ridge
from ..probes.stats import pearson
from ..seeding import substream
from .datasets import ResponseSet
from .report import EvalReport, select_layer

_MAX_RESAMPLES = 20


def _passage_split(
    rset: ResponseSet, split_id: str, seed: int, train_fraction: float
) -> tuple[np.ndarray, np.ndarray]:
    """Sentence-index (train, test) masks from a passage-level 90/10 split.

    Splits whose held-out responses are constant in some channel (so the
    correlation is undefined, e.g. a single test sentence) are resampled
    with a warning.
    """
    passages = rset.passages()
    if len(passages) < 2:
        raise ContractError("need >= 2 passages to hold any out")
    n_test = max(1, int(round((1.0 - train_fraction) * len(passages))))
    if n_test >= len(passages):
        raise ContractError(
            f"train fraction {train_fraction} leaves no training passages"
        )
    pid = np.asarray(rset.passage_ids)
    for attempt in range(_MAX_RESAMPLES):
        salt = split_id if attempt == 0 else f"{split_id}:retry{attempt}"
        order = substream(seed, f"splits:{salt}").permutation(len(passages))
        test_passages = {passages[i] for i in order[:n_test]}
        test_mask = np.isin(pid, sorted(test_passages))
        test_idx = np.nonzero(test_mask)[0]
        train_idx = np.nonzero(~test_mask)[0]
        y_test = rset.responses[test_idx]
        degenerate = len(test_idx) < 2 or np.any(np.ptp(y_test, axis=0) == 0)
        if not degenerate and len(train_idx) >= 2:
            if attempt:
                warnings.warn(
                    f"split {split_id}: resampled {attempt} time(s) to avoid "
                    "constant held-out responses",
                    stacklevel=2,
                )
            return train_idx, test_idx
    raise ContractError(
        f"split {split_id}: could not draw a non-degenerate held-out set "
        f"in {_MAX_RESAMPLES} attempts"
    )


def eval_brain_response(
    reps: np.ndarray,
    rset: ResponseSet,
    splits: int = 10,
    train_fraction: float = 0.9,
    lam: float = 1.0,
    seed: int = 0,
) -> EvalReport:
    """Ridge-map sentence representations to responses; score held-out fit.

    reps has shape [n_layers, n_sentences, dim], aligned with
    rset.sentences. Per split and layer: fit on training passages, predict
    held-out sentences, correlate per channel, average channels, divide by
    the channel-averaged ceiling. The reported score is the split average
    at the best layer.
    """
    reps = np.asarray(reps, dtype=np.float64)
    if reps.ndim != 3 or reps.shape[1] != len(rset):
        raise ContractError(
            f"representations must be [layers, {len(rset)} sentences, dim], "
            f"got shape {reps.shape}"
        )
    if splits < 1:
        raise ContractError(f"splits must be >= 1, got {splits}")
    ceiling_mean = float(np.mean(rset.ceilings))
    parts = [
        _passage_split(rset, f"brain:{rset.name}:{s}", seed, train_fraction)
        for s in range(splits)
    ]
    per_layer: dict[int, float | None] = {}
    trace: dict[str, list[float]] = {}
    n_constant_predictions = 0
    for layer in range(reps.shape[0]):
        x_all = reps[layer]
        scores = []
        for train_idx, test_idx in parts:
            model = fit_ridge(x_all[train_idx], rset.responses[train_idx], lam)
            pred = predict_ridge(model, x_all[test_idx])
            truth = rset.responses[test_idx]
            r_per_channel = np.empty(truth.shape[1])
            for v in range(truth.shape[1]):
                try:
                    r_per_channel[v] = pearson(pred[:, v], truth[:, v])
                except UndefinedCorrelationError:
                    # A constant prediction earns no credit; held-out truth
                    # is non-constant by split construction.
                    r_per_channel[v] = 0.0
                    n_constant_predictions += 1
            scores.append(float(np.mean(r_per_channel)) / ceiling_mean)
        per_layer[layer] = float(np.mean(scores))
        trace[str(layer)] = scores
    selected = select_layer(per_layer)
    return EvalReport(
        benchmark=f"brain_response:{rset.name}",
        selection_criterion="max ceiling-normalized held-out correlation over layers",
        per_layer_selection=per_layer,
        per_layer_final=dict(per_layer),
        selected_layer=selected,
        final_score=float(per_layer[selected]),
        splits_seed=seed,
        details={
            "n_sentences": len(rset),
            "n_passages": len(rset.passages()),
            "n_channels": int(rset.responses.shape[1]),
            "n_splits": splits,
            "train_fraction": train_fraction,
            "ridge_lambda": lam,
            "ceiling_mean": ceiling_mean,
            "per_split_scores": trace,
            "n_constant_predictions": n_constant_predictions,
        },
    )
