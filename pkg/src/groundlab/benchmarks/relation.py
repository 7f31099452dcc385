"""Lexical relation classification from word-vector differences."""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import ContractError
from ..models.reps import RepTable
from ..probes.metrics import macro_f1
from ..probes.mlp import fit_mlp
from ..seeding import derive_seed
from .datasets import RelationSet
from .report import EvalReport, select_layer, stratified_split

VAL_FRACTION = 0.1


def _covered(pairs, labels, reps):
    kept_pairs, kept_labels = [], []
    for (w1, w2), lab in zip(pairs, labels):
        if w1 in reps and w2 in reps:
            kept_pairs.append((w1, w2))
            kept_labels.append(lab)
    return kept_pairs, kept_labels


def _pair_matrix(reps: RepTable, layer: int, pairs) -> np.ndarray:
    idx1 = reps.rows([p[0] for p in pairs])
    idx2 = reps.rows([p[1] for p in pairs])
    vecs = reps.layer(layer)
    return vecs[idx1] - vecs[idx2]


def eval_lexical_relation(
    reps: RepTable, relset: RelationSet, seed: int = 0
) -> EvalReport:
    """Probe pair-difference vectors for the relation label.

    A multilayer probe trains per layer on the fixed training split minus
    a stratified validation slice; the layer is chosen by validation
    macro-F1 and the reported score is test macro-F1 at that layer.
    Classes absent from training are excluded from the macro average with
    a warning.
    """
    train_pairs, train_labels = _covered(
        relset.train_pairs, relset.train_labels, reps
    )
    test_pairs, test_labels = _covered(relset.test_pairs, relset.test_labels, reps)
    n_dropped = (
        len(relset.train_pairs)
        + len(relset.test_pairs)
        - len(train_pairs)
        - len(test_pairs)
    )
    if not train_pairs or not test_pairs:
        raise ContractError(
            "no scoreable relation pairs after dropping unrepresented words"
        )
    fit_idx, val_idx = stratified_split(
        "lexical_relation:validation", seed, train_labels, fractions=(0.9, VAL_FRACTION)
    )
    if len(val_idx) == 0:
        raise ContractError(
            f"validation slice is empty ({len(train_pairs)} training pairs); "
            "need more training data"
        )
    fit_labels = [train_labels[i] for i in fit_idx]
    val_labels = [train_labels[i] for i in val_idx]
    train_classes = sorted(set(fit_labels))
    if len(train_classes) < 2:
        raise ContractError("training split has fewer than 2 relation classes")
    absent = sorted(set(test_labels) - set(train_classes))
    if absent:
        warnings.warn(
            f"relation classes absent from training excluded from the "
            f"macro average: {absent}",
            stacklevel=2,
        )

    per_layer_val: dict[int, float | None] = {}
    per_layer_test: dict[int, float | None] = {}
    for layer in range(reps.n_layers):
        x_train = _pair_matrix(reps, layer, train_pairs)
        probe = fit_mlp(
            x_train[fit_idx],
            fit_labels,
            seed=derive_seed(seed, f"lexical_relation:probe:{layer}"),
        )
        val_pred = probe.predict(x_train[val_idx])
        per_layer_val[layer] = macro_f1(
            val_pred, val_labels, classes=train_classes, allow_extra_labels=True
        )
        test_pred = probe.predict(_pair_matrix(reps, layer, test_pairs))
        per_layer_test[layer] = macro_f1(
            test_pred, test_labels, classes=train_classes, allow_extra_labels=True
        )
    selected = select_layer(per_layer_val)
    return EvalReport(
        benchmark="lexical_relation",
        selection_criterion="max validation macro-F1 over layers",
        per_layer_selection=per_layer_val,
        per_layer_final=per_layer_test,
        selected_layer=selected,
        final_score=float(per_layer_test[selected]),
        splits_seed=seed,
        details={
            "n_train": len(train_pairs),
            "n_validation": int(len(val_idx)),
            "n_test": len(test_pairs),
            "n_dropped_unrepresented": n_dropped,
            "classes": train_classes,
            "classes_excluded": absent,
            "best_test_layer": select_layer(per_layer_test),
        },
    )
