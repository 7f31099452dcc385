"""Benchmark dataset containers and their TSV/FVEC loaders.

All tabular inputs are tab-separated UTF-8 with no header row.  Loaders
validate eagerly and raise IngestionError naming the offending line, so a
bad file never reaches an evaluation half-parsed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..corpus.io import read_fvec
from ..corpus.vocab import normalize
from ..errors import IngestionError

RELATION_LABELS = ("synonymy", "antonym", "hypernymy", "meronymy", "random")

# Common spellings seen in distributed relation files, mapped onto the
# canonical label set.
_RELATION_ALIASES = {
    "syn": "synonymy",
    "synonym": "synonymy",
    "synonymy": "synonymy",
    "ant": "antonym",
    "antonym": "antonym",
    "antonymy": "antonym",
    "hyper": "hypernymy",
    "hypernym": "hypernymy",
    "hypernymy": "hypernymy",
    "part_of": "meronymy",
    "part-of": "meronymy",
    "mero": "meronymy",
    "meronym": "meronymy",
    "meronymy": "meronymy",
    "random": "random",
}


def _read_rows(path, n_min: int, n_max: int, what: str):
    """Yield (lineno, fields) for each non-empty line, checking arity."""
    if not Path(path).is_file():
        raise IngestionError(f"{what} file not found: {path}")
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if not n_min <= len(fields) <= n_max:
                want = (
                    str(n_min) if n_min == n_max else f"{n_min}-{n_max}"
                )
                raise IngestionError(
                    f"{what} line {lineno}: expected {want} tab-separated "
                    f"fields, got {len(fields)}"
                )
            rows.append((lineno, fields))
    return rows


def _parse_float(text: str, what: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise IngestionError(
            f"{what} line {lineno}: {text!r} is not a number"
        ) from None
    if not np.isfinite(value):
        raise IngestionError(f"{what} line {lineno}: non-finite value {text!r}")
    return value


@dataclass
class RelatednessSet:
    """Word pairs with human relatedness scores (optional category tags)."""

    pairs: list[tuple[str, str]]
    scores: np.ndarray
    categories: list[str] | None = None

    def __len__(self) -> int:
        return len(self.pairs)


def load_relatedness(path) -> RelatednessSet:
    pairs: list[tuple[str, str]] = []
    scores: list[float] = []
    categories: list[str] = []
    seen: set[frozenset] = set()
    any_category = False
    rows = _read_rows(path, 3, 4, "relatedness")
    for lineno, fields in rows:
        w1, w2 = normalize(fields[0]), normalize(fields[1])
        if not w1 or not w2:
            raise IngestionError(f"relatedness line {lineno}: empty word")
        key = frozenset((w1, w2))
        if key in seen:
            raise IngestionError(
                f"relatedness line {lineno}: duplicate pair ({w1!r}, {w2!r})"
            )
        seen.add(key)
        pairs.append((w1, w2))
        scores.append(_parse_float(fields[2], "relatedness", lineno))
        if len(fields) == 4:
            any_category = True
            categories.append(fields[3].strip())
        else:
            categories.append("")
    if not pairs:
        raise IngestionError(f"relatedness file {path} has no rows")
    return RelatednessSet(
        pairs=pairs,
        scores=np.asarray(scores, dtype=np.float64),
        categories=categories if any_category else None,
    )


def load_aoa(path) -> dict[str, float]:
    """word -> age-of-acquisition rating."""
    ages: dict[str, float] = {}
    for lineno, fields in _read_rows(path, 2, 2, "aoa"):
        word = normalize(fields[0])
        if not word:
            raise IngestionError(f"aoa line {lineno}: empty word")
        ages[word] = _parse_float(fields[1], "aoa", lineno)
    if not ages:
        raise IngestionError(f"aoa file {path} has no rows")
    return ages


def filter_relatedness_by_aoa(
    rset: RelatednessSet, aoa: dict[str, float], max_age: float = 10.0
) -> RelatednessSet:
    """Keep pairs where both words have a rating strictly below max_age.

    Words missing from the rating table are treated as not passing.
    """
    keep = [
        i
        for i, (w1, w2) in enumerate(rset.pairs)
        if aoa.get(w1, np.inf) < max_age and aoa.get(w2, np.inf) < max_age
    ]
    return RelatednessSet(
        pairs=[rset.pairs[i] for i in keep],
        scores=rset.scores[keep],
        categories=(
            [rset.categories[i] for i in keep] if rset.categories else None
        ),
    )


@dataclass
class RelationSet:
    """Labelled word pairs with a fixed train/test partition."""

    train_pairs: list[tuple[str, str]]
    train_labels: list[str]
    test_pairs: list[tuple[str, str]]
    test_labels: list[str]

    def label_counts(self, split: str) -> dict[str, int]:
        labels = self.train_labels if split == "train" else self.test_labels
        counts: dict[str, int] = {}
        for lab in labels:
            counts[lab] = counts.get(lab, 0) + 1
        return counts


def load_relations(path) -> RelationSet:
    train_pairs: list[tuple[str, str]] = []
    train_labels: list[str] = []
    test_pairs: list[tuple[str, str]] = []
    test_labels: list[str] = []
    seen: dict[tuple[str, str], str] = {}
    for lineno, fields in _read_rows(path, 4, 4, "relations"):
        w1, w2 = normalize(fields[0]), normalize(fields[1])
        if not w1 or not w2:
            raise IngestionError(f"relations line {lineno}: empty word")
        raw_label = fields[2].strip().lower()
        if raw_label not in _RELATION_ALIASES:
            raise IngestionError(
                f"relations line {lineno}: unknown label {fields[2]!r} "
                f"(expected one of {sorted(set(_RELATION_ALIASES.values()))})"
            )
        label = _RELATION_ALIASES[raw_label]
        split = fields[3].strip().lower()
        if split not in ("train", "test"):
            raise IngestionError(
                f"relations line {lineno}: split must be train or test, "
                f"got {fields[3]!r}"
            )
        if (w1, w2) in seen and seen[(w1, w2)] != split:
            raise IngestionError(
                f"relations line {lineno}: pair ({w1!r}, {w2!r}) appears "
                "in both train and test"
            )
        seen[(w1, w2)] = split
        if split == "train":
            train_pairs.append((w1, w2))
            train_labels.append(label)
        else:
            test_pairs.append((w1, w2))
            test_labels.append(label)
    if not train_pairs or not test_pairs:
        raise IngestionError(
            f"relations file {path} must contain both train and test rows"
        )
    return RelationSet(train_pairs, train_labels, test_pairs, test_labels)


@dataclass
class FeatureNormSet:
    """Per-word semantic feature strengths as a dense matrix."""

    words: list[str]
    features: list[str]
    strengths: np.ndarray  # [n_words, n_features], >= 0

    def __len__(self) -> int:
        return len(self.words)


def load_feature_norms(path) -> FeatureNormSet:
    triples: list[tuple[str, str, float]] = []
    seen: set[tuple[str, str]] = set()
    for lineno, fields in _read_rows(path, 3, 3, "feature norms"):
        word, feat = normalize(fields[0]), fields[1].strip().lower()
        if not word or not feat:
            raise IngestionError(f"feature norms line {lineno}: empty field")
        strength = _parse_float(fields[2], "feature norms", lineno)
        if strength < 0:
            raise IngestionError(
                f"feature norms line {lineno}: negative strength {strength}"
            )
        if (word, feat) in seen:
            raise IngestionError(
                f"feature norms line {lineno}: duplicate entry "
                f"({word!r}, {feat!r})"
            )
        seen.add((word, feat))
        triples.append((word, feat, strength))
    if not triples:
        raise IngestionError(f"feature norms file {path} has no rows")
    words = sorted({w for w, _, _ in triples})
    features = sorted({f for _, f, _ in triples})
    w_index = {w: i for i, w in enumerate(words)}
    f_index = {f: i for i, f in enumerate(features)}
    strengths = np.zeros((len(words), len(features)))
    for word, feat, strength in triples:
        strengths[w_index[word], f_index[feat]] = strength
    empty = [w for i, w in enumerate(words) if not strengths[i].any()]
    if empty:
        raise IngestionError(
            f"feature norms: words with no positive feature strength: "
            f"{empty[:5]}"
        )
    return FeatureNormSet(words=words, features=features, strengths=strengths)


def load_pos_tags(path) -> dict[str, str]:
    """word -> part-of-speech tag."""
    tags: dict[str, str] = {}
    for lineno, fields in _read_rows(path, 2, 2, "pos"):
        word, tag = normalize(fields[0]), fields[1].strip().lower()
        if not word or not tag:
            raise IngestionError(f"pos line {lineno}: empty field")
        if word in tags and tags[word] != tag:
            raise IngestionError(
                f"pos line {lineno}: conflicting tags for {word!r}"
            )
        tags[word] = tag
    if not tags:
        raise IngestionError(f"pos file {path} has no rows")
    return tags


@dataclass(frozen=True)
class SentencePair:
    """A well-formed sentence and a minimally corrupted variant of it."""

    target: str
    distractor: str
    original: str
    modified: str
    pos: str


@dataclass
class SentencePairSet:
    pairs: list[SentencePair]

    def __len__(self) -> int:
        return len(self.pairs)

    def by_pos(self) -> dict[str, list[SentencePair]]:
        groups: dict[str, list[SentencePair]] = {}
        for pair in self.pairs:
            groups.setdefault(pair.pos, []).append(pair)
        return groups


def load_sentence_pairs(path) -> SentencePairSet:
    pairs: list[SentencePair] = []
    for lineno, fields in _read_rows(path, 5, 5, "sentence pairs"):
        target = normalize(fields[0])
        distractor = normalize(fields[1])
        original = normalize(fields[2])
        modified = normalize(fields[3])
        pos = fields[4].strip().lower()
        if not all((target, distractor, original, modified, pos)):
            raise IngestionError(f"sentence pairs line {lineno}: empty field")
        if original == modified:
            raise IngestionError(
                f"sentence pairs line {lineno}: original and modified "
                "sentences are identical"
            )
        pairs.append(SentencePair(target, distractor, original, modified, pos))
    if not pairs:
        raise IngestionError(f"sentence pairs file {path} has no rows")
    return SentencePairSet(pairs)


def write_sentence_pairs(pairs: list[SentencePair], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(
                "\t".join((p.target, p.distractor, p.original, p.modified, p.pos))
                + "\n"
            )


@dataclass
class ResponseSet:
    """Sentences grouped into passages, with measured response vectors."""

    sentences: list[str]
    passage_ids: list[str]
    responses: np.ndarray  # [n_sentences, n_voxels]
    ceilings: np.ndarray  # [n_voxels], estimated response reliability
    name: str = "responses"

    def __len__(self) -> int:
        return len(self.sentences)

    def passages(self) -> list[str]:
        out: list[str] = []
        for pid in self.passage_ids:
            if pid not in out:
                out.append(pid)
        return out


def load_responses(sentences_path, responses_path, ceilings_path) -> ResponseSet:
    sentences: list[str] = []
    passage_ids: list[str] = []
    for lineno, fields in _read_rows(sentences_path, 2, 2, "response sentences"):
        pid, sentence = fields[0].strip(), normalize(fields[1])
        if not pid or not sentence:
            raise IngestionError(
                f"response sentences line {lineno}: empty field"
            )
        passage_ids.append(pid)
        sentences.append(sentence)
    if not sentences:
        raise IngestionError(f"response sentences file {sentences_path} is empty")
    responses = read_fvec(responses_path)
    if responses.shape[0] != len(sentences):
        raise IngestionError(
            f"responses: {responses.shape[0]} vectors for "
            f"{len(sentences)} sentences"
        )
    ceilings_rows = _read_rows(ceilings_path, 1, 1, "ceilings")
    ceilings = np.asarray(
        [_parse_float(f[0], "ceilings", ln) for ln, f in ceilings_rows]
    )
    if ceilings.shape[0] != responses.shape[1]:
        raise IngestionError(
            f"ceilings: {ceilings.shape[0]} values for "
            f"{responses.shape[1]} response channels"
        )
    if np.any(ceilings <= 0):
        raise IngestionError("ceilings must be strictly positive")
    return ResponseSet(
        sentences=sentences,
        passage_ids=passage_ids,
        responses=responses,
        ceilings=ceilings,
    )
