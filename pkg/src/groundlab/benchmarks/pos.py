"""Part-of-speech readout with linear support-vector probes."""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import ContractError
from ..models.reps import RepTable
from ..probes.metrics import accuracy
from ..probes.svc import C_GRID, fit_svc
from .datasets import load_pos_tags  # noqa: F401  (re-exported convenience)
from .report import EvalReport, select_layer, stratified_split


def eval_pos(
    reps: RepTable,
    tags: dict[str, str],
    splits: int = 4,
    c_grid: tuple[float, ...] = C_GRID,
    seed: int = 0,
) -> EvalReport:
    """Classify each word's part of speech from its representation.

    Per split, layer, and regularization constant, a linear SVC is fit on
    the 80% train slice; the (layer, C) pair is chosen by mean validation
    accuracy and mean test accuracy at that pair is reported.
    """
    words = [w for w in sorted(tags) if w in reps]
    n_dropped = len(tags) - len(words)
    labels = [tags[w] for w in words]
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ContractError(
            f"need >= 2 part-of-speech tags among represented words, "
            f"got {classes}"
        )
    singletons = [c for c in classes if labels.count(c) == 1]
    if singletons:
        warnings.warn(
            f"tags with a single exemplar are kept but unlearnable in "
            f"held-out slices: {singletons}",
            stacklevel=2,
        )
    word_rows = reps.rows(words)
    split_parts = [
        stratified_split(f"pos:{s}", seed, labels) for s in range(splits)
    ]

    # val_acc[layer][C] and test_acc[layer][C], each averaged over splits.
    val_acc: dict[int, dict[float, float]] = {}
    test_acc: dict[int, dict[float, float]] = {}
    for layer in range(reps.n_layers):
        x_all = reps.layer(layer)[word_rows]
        val_acc[layer] = {}
        test_acc[layer] = {}
        for c in c_grid:
            vals, tests = [], []
            for train_idx, val_idx, test_idx in split_parts:
                probe = fit_svc(
                    x_all[train_idx], [labels[i] for i in train_idx], c
                )
                vals.append(
                    accuracy(
                        probe.predict(x_all[val_idx]),
                        [labels[i] for i in val_idx],
                    )
                )
                tests.append(
                    accuracy(
                        probe.predict(x_all[test_idx]),
                        [labels[i] for i in test_idx],
                    )
                )
            val_acc[layer][c] = float(np.mean(vals))
            test_acc[layer][c] = float(np.mean(tests))

    best_c = {
        layer: min(cs, key=lambda c: (-cs[c], c))
        for layer, cs in val_acc.items()
    }
    per_layer_val = {layer: val_acc[layer][best_c[layer]] for layer in val_acc}
    per_layer_test = {layer: test_acc[layer][best_c[layer]] for layer in test_acc}
    selected = select_layer(per_layer_val)
    return EvalReport(
        benchmark="pos",
        selection_criterion="max mean validation accuracy over (layer, C)",
        per_layer_selection=per_layer_val,
        per_layer_final=per_layer_test,
        selected_layer=selected,
        final_score=float(per_layer_test[selected]),
        splits_seed=seed,
        details={
            "n_words": len(words),
            "n_dropped_unrepresented": n_dropped,
            "classes": classes,
            "singleton_classes": singletons,
            "n_splits": splits,
            "c_grid": list(c_grid),
            "selected_c": best_c[selected],
            "best_c_per_layer": {str(k): v for k, v in best_c.items()},
            "val_accuracy_full": {
                str(layer): {str(c): v for c, v in cs.items()}
                for layer, cs in val_acc.items()
            },
            "test_accuracy_full": {
                str(layer): {str(c): v for c, v in cs.items()}
                for layer, cs in test_acc.items()
            },
        },
    )
