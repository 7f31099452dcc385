"""Context understanding: prefer the well-formed sentence of a minimal pair."""

from __future__ import annotations

import numpy as np

from ..corpus.vocab import BOS_ID, Vocab, tokenize
from ..errors import CapabilityError, ContractError
from ..models.losses import pool_text
from ..models.reps import sequence_logprob
from ..models.transformer import ModelState
from .datasets import SentencePairSet
from .report import EvalReport


def _segments(words: list[str], width: int) -> list[list[str]]:
    return [words[i : i + width] for i in range(0, len(words), width)]


def _encode_sentence(vocab: Vocab, text: str, max_len: int) -> np.ndarray | None:
    ids = vocab.encode(text)
    if not ids:
        return None
    return np.asarray(([BOS_ID] + ids)[:max_len], dtype=np.int64)


def _score_plain(state: ModelState, text: str) -> float | None:
    tokens = _encode_sentence(state.vocab, text, state.tcfg.max_seq_len)
    if tokens is None or tokens.shape[0] < 2:
        return None
    return sequence_logprob(state, tokens)


def eval_context_understanding(
    state: ModelState,
    spset: SentencePairSet,
    word_features: dict[int, np.ndarray] | None = None,
    segment_width: int = 3,
) -> EvalReport:
    """Fraction of minimal pairs where the model prefers the original.

    Generative models compare sequence log-probabilities. Models trained
    on short context windows score each sentence as a sum over width-3
    word segments. Contrastive context models have no sequence
    probability, so each segment's pooled text embedding is cosine-matched
    against the mean feature vector of the segment's center word and the
    matches are summed. Equal scores earn 0.5 credit; sentences that
    produce no tokens skip the pair.
    """
    vocab = state.vocab
    is_context = state.regime == "context_window"
    is_clip = state.fcfg.style == "clip_contrastive"
    if is_clip and not is_context:
        raise CapabilityError(
            "contrastive models without context training define neither a "
            "sequence probability nor the segment matching proxy"
        )
    if is_clip and word_features is None:
        raise ContractError(
            "the contrastive matching proxy needs per-word mean feature "
            "vectors (word id -> vector)"
        )
    if segment_width < 1:
        raise ContractError(f"segment width must be >= 1, got {segment_width}")

    n_missing_feature = 0

    def score_segmented_logprob(text: str) -> float | None:
        words = tokenize(text)
        if not words:
            return None
        total = 0.0
        for seg in _segments(words, segment_width):
            ids = vocab.encode_tokens(seg)
            tokens = np.asarray(
                ([BOS_ID] + ids)[: state.tcfg.max_seq_len], dtype=np.int64
            )
            if tokens.shape[0] >= 2:
                total += sequence_logprob(state, tokens)
        return total

    def score_segmented_proxy(text: str) -> float | None:
        nonlocal n_missing_feature
        words = tokenize(text)
        if not words:
            return None
        total = 0.0
        for seg in _segments(words, segment_width):
            center_ids = vocab.encode_tokens([seg[len(seg) // 2]])
            fvec = word_features.get(center_ids[0])
            if fvec is None:
                n_missing_feature += 1
                continue
            fnorm = float(np.linalg.norm(fvec))
            if fnorm < 1e-12:
                n_missing_feature += 1
                continue
            ids = vocab.encode_tokens(seg)
            tokens = np.asarray(
                [([BOS_ID] + ids)[: state.tcfg.max_seq_len]], dtype=np.int64
            )
            emb = pool_text(state, tokens, np.array([tokens.shape[1]])).data[0]
            enorm = float(np.linalg.norm(emb))
            if enorm < 1e-12:
                n_missing_feature += 1
                continue
            total += float(emb @ np.asarray(fvec, dtype=np.float64)) / (
                enorm * fnorm
            )
        return total

    if is_clip:
        score, mode = score_segmented_proxy, "contrastive_proxy"
    elif is_context:
        score, mode = score_segmented_logprob, "generative_segmented"
    else:
        score, mode = (lambda t: _score_plain(state, t)), "generative"

    wins: list[float] = []
    pos_wins: dict[str, list[float]] = {}
    n_skipped = 0
    n_ties = 0
    for pair in spset.pairs:
        s_orig = score(pair.original)
        s_mod = score(pair.modified)
        if s_orig is None or s_mod is None:
            n_skipped += 1
            continue
        if s_orig > s_mod:
            credit = 1.0
        elif s_orig == s_mod:
            credit = 0.5
            n_ties += 1
        else:
            credit = 0.0
        wins.append(credit)
        pos_wins.setdefault(pair.pos, []).append(credit)
    if not wins:
        raise ContractError(
            f"no scoreable sentence pairs ({n_skipped} skipped as untokenizable)"
        )
    overall = float(np.mean(wins))
    per_pos = {pos: float(np.mean(vals)) for pos, vals in sorted(pos_wins.items())}
    details = {
        "mode": mode,
        "per_pos": per_pos,
        "per_pos_counts": {pos: len(vals) for pos, vals in sorted(pos_wins.items())},
        "n_pairs": len(spset),
        "n_scored": len(wins),
        "n_skipped_untokenizable": n_skipped,
        "n_ties": n_ties,
        "segment_width": segment_width if mode != "generative" else None,
    }
    if is_clip:
        details["n_segments_without_feature"] = n_missing_feature
    return EvalReport(
        benchmark="context_understanding",
        selection_criterion="single model-level score (no layer selection)",
        per_layer_selection={0: overall},
        per_layer_final={0: overall},
        selected_layer=0,
        final_score=overall,
        splits_seed=None,
        details=details,
    )
