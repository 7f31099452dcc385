"""Representation extraction and sequence scoring on trained models.

Words are presented in isolation as [BOS] + word tokens and read out at the
last word token; every layer (embedding layer included, as layer 0) yields
one vector. Fused models are run text-only here — extraction never supplies
an image.
"""

from __future__ import annotations

import numpy as np

from .. import numcore as nc
from ..corpus.vocab import BOS_ID, PAD_ID, UNK_ID, Vocab
from ..errors import CapabilityError, ContractError
from .transformer import ModelState, forward_lm

Array = np.ndarray


def n_rep_layers(state: ModelState) -> int:
    return state.tcfg.n_layers + 1


def extract_word_reps(state: ModelState, word: str, vocab: Vocab) -> tuple[Array, bool]:
    """Per-layer vectors for one word: array [n_layers+1, hidden_dim].

    Returns (reps, used_unk) where used_unk flags an out-of-vocabulary
    word that degraded to the unknown token.
    """
    ids = vocab.encode(word)
    if not ids:
        raise ContractError(f"word {word!r} produced no tokens")
    tokens = np.asarray([BOS_ID] + ids, dtype=np.int64)
    _, hiddens = forward_lm(state, tokens, text_only=True)
    reps = np.stack([h.data[-1] for h in hiddens])
    return reps, UNK_ID in ids


def extract_words_matrix(
    state: ModelState, words: list[str], vocab: Vocab
) -> tuple[Array, list[str], list[str]]:
    """Batched extraction: per-layer matrix [n_layers+1, n_kept, hidden_dim].

    Out-of-vocabulary words are dropped (their representation would be the
    shared [UNK] vector, which carries no word identity). Returns
    (reps, kept_words, dropped_words).
    """
    kept: list[str] = []
    dropped: list[str] = []
    seqs: list[list[int]] = []
    for w in words:
        ids = vocab.encode(w)
        if not ids or UNK_ID in ids:
            dropped.append(w)
        else:
            kept.append(w)
            seqs.append([BOS_ID] + ids)
    if not kept:
        return np.zeros((n_rep_layers(state), 0, state.tcfg.hidden_dim)), kept, dropped
    lengths = np.array([len(s) for s in seqs])
    tokens = np.full((len(seqs), int(lengths.max())), PAD_ID, dtype=np.int64)
    for i, s in enumerate(seqs):
        tokens[i, : len(s)] = s
    _, hiddens = forward_lm(state, tokens, text_only=True)
    rows = np.arange(len(seqs))
    reps = np.stack([h.data[rows, lengths - 1] for h in hiddens])
    return reps, kept, dropped


def extract_sequence_reps(
    state: ModelState, texts: list[str], vocab: Vocab
) -> Array:
    """Last-token per-layer states for whole texts: [n_layers+1, n, dim]."""
    if not texts:
        raise ContractError("no texts to embed")
    seqs = []
    for text in texts:
        ids = vocab.encode(text)
        if not ids:
            raise ContractError(f"text {text!r} produced no tokens")
        seqs.append(([BOS_ID] + ids)[: state.tcfg.max_seq_len])
    lengths = np.array([len(s) for s in seqs])
    tokens = np.full((len(seqs), int(lengths.max())), PAD_ID, dtype=np.int64)
    for i, s in enumerate(seqs):
        tokens[i, : len(s)] = s
    _, hiddens = forward_lm(state, tokens, text_only=True)
    rows = np.arange(len(seqs))
    return np.stack([h.data[rows, lengths - 1] for h in hiddens])


class RepTable:
    """Per-word, per-layer representations with word lookup.

    reps has shape [n_layers, n_words, dim]; layer 0 is the embedding
    layer. Benchmarks consume this container, so evaluations run the same
    way on model-extracted and externally constructed representations.
    """

    def __init__(self, words: list[str], reps: Array, dropped: list[str] | None = None):
        reps = np.asarray(reps, dtype=np.float64)
        if reps.ndim != 3:
            raise ContractError(
                f"representation tensor must be [layers, words, dim], "
                f"got shape {reps.shape}"
            )
        if reps.shape[1] != len(words):
            raise ContractError(
                f"{len(words)} words but {reps.shape[1]} representation rows"
            )
        if len(set(words)) != len(words):
            raise ContractError("duplicate words in representation table")
        self.words = list(words)
        self.reps = reps
        self.dropped = list(dropped) if dropped else []
        self._index = {w: i for i, w in enumerate(self.words)}

    @property
    def n_layers(self) -> int:
        return self.reps.shape[0]

    @property
    def dim(self) -> int:
        return self.reps.shape[2]

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def rows(self, words: list[str]) -> Array:
        """Index array into the word axis; missing words are an error."""
        try:
            return np.asarray([self._index[w] for w in words], dtype=int)
        except KeyError as exc:
            raise ContractError(f"word {exc.args[0]!r} not in representation table")

    def layer(self, layer: int) -> Array:
        return self.reps[layer]

    @classmethod
    def from_model(
        cls, state: ModelState, words: list[str], vocab: Vocab
    ) -> "RepTable":
        reps, kept, dropped = extract_words_matrix(state, words, vocab)
        return cls(words=kept, reps=reps, dropped=dropped)


def sequence_logprob(
    state: ModelState, tokens: Array, fvec: Array | None = None
) -> float:
    """Total log-probability of tokens[1:] given their left context.

    Contrastive-only models cannot produce one; callers get a capability
    error pointing at the embedding matching-score proxy instead.
    """
    if state.fcfg.style == "clip_contrastive":
        raise CapabilityError(
            "contrastive models define no sequence probability; "
            "use the matching-score proxy"
        )
    tokens = np.asarray(tokens, dtype=np.int64)
    if tokens.ndim != 1 or tokens.shape[0] < 2:
        raise ContractError("sequence_logprob needs a flat sequence of >= 2 tokens")
    text_only = fvec is None
    logits, _ = forward_lm(state, tokens[:-1], fvec=fvec, text_only=text_only)
    logp = nc.log_softmax(logits, axis=-1).data
    return float(logp[np.arange(len(tokens) - 1), tokens[1:]].sum())
