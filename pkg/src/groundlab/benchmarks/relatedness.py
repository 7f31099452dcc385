"""Word relatedness: rank-correlate representation cosines with human scores."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError, NumericError, UndefinedCorrelationError
from ..models.reps import RepTable
from ..probes.stats import spearman
from .datasets import RelatednessSet, filter_relatedness_by_aoa
from .report import EvalReport, select_layer

MIN_PAIRS = 3


def cosine_pair_sims(vecs: np.ndarray, idx1: np.ndarray, idx2: np.ndarray) -> np.ndarray:
    """Cosine similarity per pair for one layer's word vectors [n, d]."""
    norms = np.linalg.norm(vecs, axis=1)
    if np.any(norms == 0):
        bad = int(np.argmin(norms))
        raise NumericError(f"zero-norm representation at row {bad}")
    unit = vecs / norms[:, None]
    return np.einsum("ij,ij->i", unit[idx1], unit[idx2])


def eval_relatedness(
    reps: RepTable,
    rset: RelatednessSet,
    aoa: dict[str, float] | None = None,
    max_age: float = 10.0,
    category: str | None = None,
) -> EvalReport:
    """Best-layer Spearman correlation between model and human relatedness.

    Pairs are dropped when either word has no representation, or (if an
    acquisition-age table is supplied) when either word is not rated
    younger than max_age. A category filter restricts scoring to pairs
    carrying that tag.
    """
    n_input = len(rset)
    dropped_age = 0
    if aoa is not None:
        filtered = filter_relatedness_by_aoa(rset, aoa, max_age)
        dropped_age = n_input - len(filtered)
        rset = filtered
    if category is not None:
        if rset.categories is None:
            raise ContractError(
                "relatedness set carries no category tags to filter on"
            )
        keep = [i for i, c in enumerate(rset.categories) if c == category]
        if not keep:
            raise ContractError(f"no pairs tagged {category!r}")
        rset = RelatednessSet(
            pairs=[rset.pairs[i] for i in keep],
            scores=rset.scores[keep],
            categories=[rset.categories[i] for i in keep],
        )
    covered = [
        i for i, (w1, w2) in enumerate(rset.pairs) if w1 in reps and w2 in reps
    ]
    dropped_vocab = len(rset) - len(covered)
    if len(covered) < MIN_PAIRS:
        raise ContractError(
            f"only {len(covered)} scoreable pairs survive filtering "
            f"(need >= {MIN_PAIRS}): {n_input} in, {dropped_age} dropped by "
            f"acquisition age, {dropped_vocab} dropped as unrepresented"
        )
    pairs = [rset.pairs[i] for i in covered]
    human = rset.scores[covered]
    idx1 = reps.rows([p[0] for p in pairs])
    idx2 = reps.rows([p[1] for p in pairs])

    per_layer: dict[int, float | None] = {}
    layer_errors: dict[int, str] = {}
    for layer in range(reps.n_layers):
        sims = cosine_pair_sims(reps.layer(layer), idx1, idx2)
        try:
            per_layer[layer] = spearman(sims, human)
        except UndefinedCorrelationError as exc:
            per_layer[layer] = None
            layer_errors[layer] = str(exc)
    if all(v is None for v in per_layer.values()):
        raise UndefinedCorrelationError(
            "correlation undefined at every layer: " + str(layer_errors)
        )
    selected = select_layer(per_layer)
    details = {
        "n_pairs_input": n_input,
        "n_pairs_scored": len(pairs),
        "n_dropped_by_age": dropped_age,
        "n_dropped_unrepresented": dropped_vocab,
        "category_filter": category,
    }
    if layer_errors:
        details["layer_errors"] = {str(k): v for k, v in layer_errors.items()}
    return EvalReport(
        benchmark="relatedness" if category is None else f"relatedness:{category}",
        selection_criterion="max spearman over layers",
        per_layer_selection=per_layer,
        per_layer_final=dict(per_layer),
        selected_layer=selected,
        final_score=float(per_layer[selected]),
        splits_seed=None,
        details=details,
    )
