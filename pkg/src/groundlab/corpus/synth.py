"""Synthetic grounded world for desk-scale experiments.

Scenes carry one value per attribute (color, shape, action). Content words
denote sets of 1-3 values of a single attribute, so two words can be exact
synonyms, overlap partially, or be unrelated; ground-truth similarity is the
cosine of their value-indicator vectors. Each record is a templated caption
describing a scene plus a noisy linear embedding of the scene's values.

Two structural knobs make the world learnable by both routes:

* value_corr couples the attribute values within a scene, so words that
  denote the same value occur in the same contexts — the purely
  distributional signal a text-only learner needs.
* restate_prob re-names an attribute with a second (often different) word
  inside the same caption, adding direct co-occurrence between near-synonyms.

Feature noise bounds how much a contrastive learner can extract per record,
so the text-only route can close the gap once enough captions are seen.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ContractError
from ..seeding import substream
from .io import CaptionRecord, write_captions, write_fvec

ATTRIBUTES = ("color", "shape", "action")

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"

_FUNCTION_WORDS = ("the", "a", "is", "it", "and", "now", "look")


@dataclass
class SynthWorld:
    """A generated corpus plus the ground truth it was generated from."""

    words: list[str]  # content words
    word_attr: np.ndarray  # attribute index per word
    word_arcs: list[frozenset[int]]  # denoted value ids (attribute-local)
    n_values: int  # values per attribute
    records: list[CaptionRecord]
    features: np.ndarray  # [n_records, feature_dim], float32-valued
    sim_matrix: np.ndarray  # [n_words, n_words] ground-truth similarity
    sims: list[tuple[str, str, float, str]]  # (word1, word2, sim, category)


def _make_word(rng: np.random.Generator, taken: set[str]) -> str:
    while True:
        n_syll = int(rng.integers(2, 4))
        word = "".join(
            _CONSONANTS[rng.integers(len(_CONSONANTS))]
            + _VOWELS[rng.integers(len(_VOWELS))]
            for _ in range(n_syll)
        )
        if word not in taken and word not in _FUNCTION_WORDS:
            taken.add(word)
            return word


def _gt_similarity(attr_a, arc_a, attr_b, arc_b) -> float:
    if attr_a != attr_b:
        return 0.0
    inter = len(arc_a & arc_b)
    if inter == 0:
        return 0.0
    return inter / float(np.sqrt(len(arc_a) * len(arc_b)))


def synth_world(
    seed: int,
    n_pairs: int,
    vocab_size: int = 48,
    feature_dim: int = 32,
    *,
    noise: float = 1.0,
    value_corr: float = 0.5,
    restate_prob: float = 0.5,
) -> SynthWorld:
    """Generate `n_pairs` caption+feature records over a seeded world.

    vocab_size counts content words; the first values-per-attribute words of
    each attribute denote exactly one value each (so every value is
    nameable), the remainder are synonyms of earlier words or fresh words
    denoting 1-3 values. Deterministic for a fixed argument tuple.
    """
    if vocab_size < 20:
        raise ContractError(f"vocab_size must be >= 20, got {vocab_size}")
    if feature_dim < 8:
        raise ContractError(f"feature_dim must be >= 8, got {feature_dim}")
    rng = substream(seed, "synth")

    n_attr = len(ATTRIBUTES)
    n_values = max(2, vocab_size // (2 * n_attr))
    taken: set[str] = set()
    words: list[str] = []
    word_attr: list[int] = []
    word_arcs: list[frozenset[int]] = []

    # canonical single-value words: every value of every attribute nameable
    for a in range(n_attr):
        for v in range(n_values):
            words.append(_make_word(rng, taken))
            word_attr.append(a)
            word_arcs.append(frozenset([v]))

    # remaining words: synonyms (same arc as an earlier word) or arc words
    while len(words) < vocab_size:
        first_extra = len(words) == n_attr * n_values
        if first_extra or rng.random() < 0.35:
            src = 0 if first_extra else int(rng.integers(len(words)))
            words.append(_make_word(rng, taken))
            word_attr.append(word_attr[src])
            word_arcs.append(word_arcs[src])
        else:
            a = int(rng.integers(n_attr))
            k = int(rng.integers(1, min(3, n_values) + 1))
            arc = frozenset(rng.choice(n_values, size=k, replace=False).tolist())
            words.append(_make_word(rng, taken))
            word_attr.append(a)
            word_arcs.append(arc)

    word_attr_arr = np.asarray(word_attr)
    n_words = len(words)
    sim_matrix = np.eye(n_words)
    sims: list[tuple[str, str, float, str]] = []
    for i in range(n_words):
        for j in range(i + 1, n_words):
            s = _gt_similarity(word_attr[i], word_arcs[i], word_attr[j], word_arcs[j])
            sim_matrix[i, j] = sim_matrix[j, i] = s
            category = (
                ATTRIBUTES[word_attr[i]] if word_attr[i] == word_attr[j] else "cross"
            )
            sims.append((words[i], words[j], s, category))

    # words naming each (attribute, value)
    namers: list[list[list[int]]] = [
        [
            [w for w in range(n_words) if word_attr[w] == a and v in word_arcs[w]]
            for v in range(n_values)
        ]
        for a in range(n_attr)
    ]

    # value embedding: one unit column per (attribute, value)
    n_total_values = n_attr * n_values
    value_emb = rng.normal(size=(feature_dim, n_total_values))
    value_emb /= np.linalg.norm(value_emb, axis=0, keepdims=True)

    records: list[CaptionRecord] = []
    feats = np.zeros((n_pairs, feature_dim))
    for r in range(n_pairs):
        cv = int(rng.integers(n_values))
        sv = cv if rng.random() < value_corr else int(rng.integers(n_values))
        av = cv if rng.random() < value_corr else int(rng.integers(n_values))
        scene = (cv, sv, av)

        def namer(a: int) -> str:
            pool = namers[a][scene[a]]
            return words[pool[int(rng.integers(len(pool)))]]

        parts = ["the", namer(0), namer(1), namer(2)]
        if rng.random() < 0.5:
            parts.append("now")
        if rng.random() < restate_prob:
            parts += [".", "it", "is", namer(0), "and", namer(1)]
        parts.append(".")
        caption = " ".join(parts)

        multihot = np.zeros(n_total_values)
        for a, v in enumerate(scene):
            multihot[a * n_values + v] = 1.0
        fv = value_emb @ multihot + noise * rng.normal(size=feature_dim)
        feats[r] = fv
        records.append(CaptionRecord(id=f"synth-{r:06d}", caption=caption, fvec_index=r))

    # float32-valued so in-memory use and FVEC round-trips agree bitwise
    features = feats.astype(np.float32).astype(np.float64)
    return SynthWorld(
        words=words,
        word_attr=word_attr_arr,
        word_arcs=word_arcs,
        n_values=n_values,
        records=records,
        features=features,
        sim_matrix=sim_matrix,
        sims=sims,
    )


def write_world(world: SynthWorld, outdir) -> dict[str, str]:
    """Emit captions.jsonl, feats.fvec, and sims.tsv under `outdir`."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    captions = outdir / "captions.jsonl"
    feats = outdir / "feats.fvec"
    sims = outdir / "sims.tsv"
    write_captions(captions, world.records)
    write_fvec(feats, world.features)
    with open(sims, "w", encoding="utf-8") as fh:
        for w1, w2, s, category in world.sims:
            fh.write(f"{w1}\t{w2}\t{s:.10f}\t{category}\n")
    return {"captions": str(captions), "features": str(feats), "sims": str(sims)}
