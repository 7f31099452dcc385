"""Semantic feature-norm prediction via partial-least-squares regression."""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import ContractError
from ..models.reps import RepTable
from ..probes.metrics import map_at_k
from ..probes.pls import fit_pls, predict_pls
from .datasets import FeatureNormSet
from .report import EvalReport, derive_split, select_layer

MIN_WORDS = 20


def _mean_map(pred: np.ndarray, truth: np.ndarray) -> float:
    scores = [
        map_at_k(pred[i], np.nonzero(truth[i])[0]) for i in range(pred.shape[0])
    ]
    return float(np.mean(scores))


def eval_semantic_features(
    reps: RepTable,
    fnset: FeatureNormSet,
    splits: int = 2,
    seed: int = 0,
    n_components: int = 100,
) -> EvalReport:
    """Regress representations onto feature strengths; score retrieval MAP.

    Per split and layer, a PLS regressor is fit on the 80% train slice;
    the layer is chosen by mean validation MAP and the mean test MAP over
    splits at that layer is reported. Per-word test MAP values (selected
    layer, averaged over the splits that tested the word) are recorded for
    downstream analyses.
    """
    if not fnset.features:
        raise ContractError("feature inventory is empty")
    words = [w for w in fnset.words if w in reps]
    n_dropped = len(fnset.words) - len(words)
    if len(words) < MIN_WORDS:
        raise ContractError(
            f"only {len(words)} represented feature-norm words "
            f"(need >= {MIN_WORDS}); {n_dropped} dropped"
        )
    word_rows = reps.rows(words)
    keep = [fnset.words.index(w) for w in words]
    strengths = fnset.strengths[keep]

    split_parts = [
        derive_split(f"semantic_features:{s}", seed, len(words))
        for s in range(splits)
    ]
    per_layer_val: dict[int, float | None] = {}
    per_layer_test: dict[int, float | None] = {}
    per_word_test: dict[int, dict[str, list[float]]] = {}
    n_pls_warnings = 0
    for layer in range(reps.n_layers):
        x_all = reps.layer(layer)[word_rows]
        val_scores, test_scores = [], []
        per_word_test[layer] = {}
        for train_idx, val_idx, test_idx in split_parts:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                model = fit_pls(
                    x_all[train_idx], strengths[train_idx], n_components
                )
            n_pls_warnings += len(caught)
            val_pred = predict_pls(model, x_all[val_idx])
            test_pred = predict_pls(model, x_all[test_idx])
            val_scores.append(_mean_map(val_pred, strengths[val_idx]))
            test_scores.append(_mean_map(test_pred, strengths[test_idx]))
            for row, word_i in enumerate(test_idx):
                word_map = map_at_k(
                    test_pred[row], np.nonzero(strengths[word_i])[0]
                )
                per_word_test[layer].setdefault(words[word_i], []).append(word_map)
        per_layer_val[layer] = float(np.mean(val_scores))
        per_layer_test[layer] = float(np.mean(test_scores))
    selected = select_layer(per_layer_val)
    per_word = {
        w: float(np.mean(vals)) for w, vals in sorted(per_word_test[selected].items())
    }
    return EvalReport(
        benchmark="semantic_features",
        selection_criterion="max mean validation MAP over layers",
        per_layer_selection=per_layer_val,
        per_layer_final=per_layer_test,
        selected_layer=selected,
        final_score=float(per_layer_test[selected]),
        splits_seed=seed,
        details={
            "n_words": len(words),
            "n_features": len(fnset.features),
            "n_dropped_unrepresented": n_dropped,
            "n_splits": splits,
            "n_components_requested": n_components,
            "n_component_warnings": n_pls_warnings,
            "per_word_test_map": per_word,
        },
    )
