"""Model-to-model judgment agreement and category-split relatedness scores."""

from __future__ import annotations

import numpy as np

from ..benchmarks.relatedness import eval_relatedness
from ..benchmarks.report import EvalReport
from ..errors import ContractError
from ..probes.stats import spearman
from .likeness import _aligned_values


def model_model_corr(sims_a: dict, sims_b: dict) -> float:
    """Spearman correlation between two models' pair judgments.

    Both inputs map (word1, word2) to a similarity value over the same
    pair set (order within a pair does not matter).
    """
    _, a, b = _aligned_values(sims_a, sims_b)
    if a.shape[0] < 3:
        raise ContractError(f"need >= 3 shared pairs, got {a.shape[0]}")
    return spearman(a, b)


def cross_seed_self_correlation(sims_by_seed: list[dict]) -> float:
    """Mean pairwise judgment correlation across runs of one configuration.

    An upper reference for cross-model agreement: a model family that
    cannot replicate its own judgments across seeds bounds how much
    agreement one can expect between families.
    """
    if len(sims_by_seed) < 2:
        raise ContractError("need >= 2 seed runs for a self-correlation")
    corrs = [
        model_model_corr(sims_by_seed[i], sims_by_seed[j])
        for i in range(len(sims_by_seed))
        for j in range(i + 1, len(sims_by_seed))
    ]
    return float(np.mean(corrs))


def split_scores(reps, rset, categories=None, **eval_kwargs) -> dict[str, EvalReport]:
    """Relatedness evaluation restricted to each category tag in turn."""
    if rset.categories is None:
        raise ContractError("relatedness set carries no category tags")
    if categories is None:
        categories = sorted({c for c in rset.categories if c})
    if not categories:
        raise ContractError("no categories to split on")
    return {
        c: eval_relatedness(reps, rset, category=c, **eval_kwargs)
        for c in categories
    }


def per_word_map_difference(
    report_a: EvalReport, report_b: EvalReport
) -> dict[str, float]:
    """Per-word test-MAP difference (a minus b) over words both runs tested.

    Feed the result to regress_word_values to relate the gap between two
    models to a word feature.
    """
    try:
        map_a = report_a.details["per_word_test_map"]
        map_b = report_b.details["per_word_test_map"]
    except KeyError:
        raise ContractError(
            "both reports need per-word test MAP details "
            "(produced by the semantic-features evaluation)"
        ) from None
    shared = sorted(set(map_a) & set(map_b))
    if not shared:
        raise ContractError("the two reports share no tested words")
    return {w: float(map_a[w]) - float(map_b[w]) for w in shared}
