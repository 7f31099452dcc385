"""Labeling transforms: caption records -> training examples per regime.

full_caption   [BOS] w1 .. wn            next-token prediction over the caption
single_word    [BOS] w                   one example per caption word + feature
context_window [BOS] w_i .. w_{i+k-1}    sliding windows of k words + feature
word_only      [CLS] w                   predict the word from [CLS], no feature
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from .vocab import BOS_ID, CLS_ID, Vocab

REGIMES = ("full_caption", "single_word", "context_window", "word_only")


@dataclass(frozen=True)
class TrainingExample:
    tokens: np.ndarray  # int64 ids, shape [T]
    fvec: np.ndarray | None  # float64 feature vector or None
    regime: str


def _ids(tokens: list[int]) -> np.ndarray:
    return np.asarray(tokens, dtype=np.int64)


def make_examples(
    records,
    vocab: Vocab,
    regime: str,
    context_width: int = 3,
    features: np.ndarray | None = None,
) -> list[TrainingExample]:
    """Expand caption records into training examples for one regime.

    A pure function of its arguments: repeated calls agree exactly. When
    `features` is given, every example except word_only carries its
    record's feature vector; with features=None all fvecs are None (the
    text-only path).
    """
    if regime not in REGIMES:
        raise ContractError(f"unknown regime '{regime}', expected one of {REGIMES}")
    if context_width < 1:
        raise ContractError(f"context_width must be >= 1, got {context_width}")

    out: list[TrainingExample] = []
    for rec in records:
        word_ids = vocab.encode(rec.caption)
        fv = None
        if features is not None and regime != "word_only":
            fv = features[rec.fvec_index]
        if regime == "full_caption":
            out.append(TrainingExample(_ids([BOS_ID] + word_ids), fv, regime))
        elif regime == "single_word":
            for w in word_ids:
                out.append(TrainingExample(_ids([BOS_ID, w]), fv, regime))
        elif regime == "context_window":
            if len(word_ids) <= context_width:
                out.append(TrainingExample(_ids([BOS_ID] + word_ids), fv, regime))
            else:
                for i in range(len(word_ids) - context_width + 1):
                    window = word_ids[i : i + context_width]
                    out.append(TrainingExample(_ids([BOS_ID] + window), fv, regime))
        else:  # word_only
            for w in word_ids:
                out.append(TrainingExample(_ids([CLS_ID, w]), None, regime))
    return out


def mean_word_features(records, features: np.ndarray, vocab: Vocab) -> dict[int, np.ndarray]:
    """Mean feature vector over all records whose caption contains each word.

    The empirical visual association of a word; used as the reference side
    of matching-score proxies when a generative probability is unavailable.
    """
    sums: dict[int, np.ndarray] = {}
    counts: dict[int, int] = {}
    for rec in records:
        fv = features[rec.fvec_index]
        for w in set(vocab.encode(rec.caption)):
            if w in sums:
                sums[w] += fv
                counts[w] += 1
            else:
                sums[w] = fv.copy()
                counts[w] = 1
    return {w: sums[w] / counts[w] for w in sums}
