"""Assemble minimal sentence pairs by modifying one non-target word.

For a (target, distractor) pair: pick the base sentences where the
distractor competes best with the target, then for each base sentence try
every candidate word at every non-target position and keep the
modification whose distractor-substituted variant scores best on
1.5 * S(dist_new) - S(dist). The emitted pair is (original sentence,
modified sentence with the target intact).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

from ..benchmarks.datasets import SentencePair, SentencePairSet
from ..corpus.vocab import tokenize
from ..errors import ConstructionError, ContractError, IngestionError

DEFAULT_CANDIDATE_VOCAB_SIZE = 2000
CRITERION_WEIGHT = 1.5


@dataclass(frozen=True)
class CandidatePair:
    """A chosen modification plus the surprisal triple that selected it."""

    target: str
    distractor: str
    original: str
    modified: str
    changed_position: int
    s_orig: float
    s_dist: float
    s_dist_new: float
    criterion: float


@dataclass(frozen=True)
class TargetSpec:
    word: str
    pos: str
    distractors: tuple[str, ...]


def canonical_tokens(sentence: str) -> list[str]:
    return tokenize(sentence)


def _join(tokens: list[str]) -> str:
    return " ".join(tokens)


def _target_position(tokens: list[str], target: str) -> int:
    hits = [i for i, tok in enumerate(tokens) if tok == target]
    if len(hits) != 1:
        raise ContractError(
            f"sentence must contain {target!r} exactly once, found "
            f"{len(hits)}: {_join(tokens)!r}"
        )
    return hits[0]


def _with_word(tokens: list[str], position: int, word: str) -> list[str]:
    out = list(tokens)
    out[position] = word
    return out


def select_base_sentences(
    client, target: str, distractor: str, sentences: list[str], n: int = 20
) -> list[str]:
    """The n sentences where swapping in the distractor costs the least.

    Sentences are ranked by S(original) - S(original with the distractor
    replacing the target), ascending; ties keep input order. When fewer
    than n sentences are available, all are returned with a warning.
    """
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    if not sentences:
        raise ContractError("no sentences supplied")
    token_lists = [canonical_tokens(s) for s in sentences]
    positions = [_target_position(toks, target) for toks in token_lists]
    originals = [_join(toks) for toks in token_lists]
    swapped = [
        _join(_with_word(toks, pos, distractor))
        for toks, pos in zip(token_lists, positions)
    ]
    scores = client.score_many(originals + swapped)
    s_orig = scores[: len(sentences)]
    s_dist = scores[len(sentences) :]
    diffs = [so - sd for so, sd in zip(s_orig, s_dist)]
    order = sorted(range(len(sentences)), key=lambda i: (diffs[i], i))
    if len(sentences) < n:
        warnings.warn(
            f"only {len(sentences)} sentences for target {target!r} "
            f"(wanted {n}); returning all",
            stacklevel=2,
        )
    return [originals[i] for i in order[:n]]


def make_pair(
    client,
    target: str,
    distractor: str,
    sentence: str,
    candidate_vocab: list[str],
) -> CandidatePair:
    """Choose the one-word modification minimizing the selection criterion.

    Every candidate word is tried at every non-target position (skipping
    candidates equal to the word already there, the target, or the
    distractor); the criterion compares each modified sentence's
    distractor variant against the unmodified distractor variant.
    """
    if not candidate_vocab:
        raise ContractError("candidate vocabulary is empty")
    tokens = canonical_tokens(sentence)
    t_pos = _target_position(tokens, target)
    original = _join(tokens)

    variants: list[tuple[int, str, str, str]] = []  # position, word, new, dist_new
    for pos in range(len(tokens)):
        if pos == t_pos:
            continue
        for word in candidate_vocab:
            if word in (tokens[pos], target, distractor):
                continue
            new_tokens = _with_word(tokens, pos, word)
            variants.append(
                (
                    pos,
                    word,
                    _join(new_tokens),
                    _join(_with_word(new_tokens, t_pos, distractor)),
                )
            )
    if not variants:
        raise ConstructionError(
            f"no admissible modification of {original!r}: every candidate "
            "equals the word already in place"
        )
    s_orig, s_dist = client.score_many(
        [original, _join(_with_word(tokens, t_pos, distractor))]
    )
    dist_new_scores = client.score_many([v[3] for v in variants])
    best_index = min(
        range(len(variants)),
        key=lambda i: (CRITERION_WEIGHT * dist_new_scores[i] - s_dist, i),
    )
    pos, _, new_sentence, _ = variants[best_index]
    s_dist_new = dist_new_scores[best_index]
    return CandidatePair(
        target=target,
        distractor=distractor,
        original=original,
        modified=new_sentence,
        changed_position=pos,
        s_orig=s_orig,
        s_dist=s_dist,
        s_dist_new=s_dist_new,
        criterion=CRITERION_WEIGHT * s_dist_new - s_dist,
    )


@dataclass
class BenchmarkBuild:
    """Finished pair set plus the per-pair audit trail and build log."""

    pairs: SentencePairSet
    candidates: list[CandidatePair]
    log: dict


def build_candidate_vocab(
    records, size: int = DEFAULT_CANDIDATE_VOCAB_SIZE
) -> list[str]:
    """Most frequent caption words, ordered by (-count, word)."""
    counts: dict[str, int] = {}
    for rec in records:
        for tok in tokenize(rec.caption):
            counts[tok] = counts.get(tok, 0) + 1
    ranked = sorted(counts, key=lambda w: (-counts[w], w))
    return ranked[:size]


def build_benchmark(
    client,
    targets: list[TargetSpec],
    sentences_by_target: dict[str, list[str]],
    candidate_vocab: list[str],
    n_per_pair: int = 20,
) -> BenchmarkBuild:
    """Full benchmark assembly: one pair per selected base sentence.

    Per (target, distractor): select up to n_per_pair base sentences, then
    modify each. Sentences that violate the exactly-one-target rule and
    per-sentence construction failures are logged and skipped.
    """
    if not targets:
        raise ContractError("no targets supplied")
    if not candidate_vocab:
        raise ContractError("candidate vocabulary is empty")
    pairs: list[SentencePair] = []
    candidates: list[CandidatePair] = []
    skipped: list[str] = []
    for spec in targets:
        pool = sentences_by_target.get(spec.word, [])
        eligible = []
        for sentence in pool:
            if canonical_tokens(sentence).count(spec.word) == 1:
                eligible.append(sentence)
            else:
                skipped.append(
                    f"target {spec.word!r}: dropped sentence without exactly "
                    f"one target occurrence: {sentence!r}"
                )
        if not eligible:
            skipped.append(f"target {spec.word!r}: no eligible sentences")
            continue
        for distractor in spec.distractors:
            base = select_base_sentences(
                client, spec.word, distractor, eligible, n=n_per_pair
            )
            for sentence in base:
                try:
                    cand = make_pair(
                        client, spec.word, distractor, sentence, candidate_vocab
                    )
                except (ConstructionError, ContractError) as exc:
                    skipped.append(
                        f"target {spec.word!r} / distractor {distractor!r}: "
                        f"{exc}"
                    )
                    continue
                candidates.append(cand)
                pairs.append(
                    SentencePair(
                        target=spec.word,
                        distractor=distractor,
                        original=cand.original,
                        modified=cand.modified,
                        pos=spec.pos,
                    )
                )
    log = {
        "n_targets": len(targets),
        "n_pairs": len(pairs),
        "n_skipped": len(skipped),
        "skipped": skipped,
        "selection_criterion": (
            f"{CRITERION_WEIGHT} * S(distractor in modified) - "
            "S(distractor in original); surprisal totals from the scoring "
            "service; no independent grammaticality screening"
        ),
    }
    return BenchmarkBuild(SentencePairSet(pairs), candidates, log)


def load_targets(path) -> list[TargetSpec]:
    """TSV rows of (word, pos, comma-separated distractors)."""
    if not Path(path).is_file():
        raise IngestionError(f"targets file not found: {path}")
    out: list[TargetSpec] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise IngestionError(
                    f"targets line {lineno}: expected 3 tab-separated fields, "
                    f"got {len(fields)}"
                )
            word = fields[0].strip().lower()
            pos = fields[1].strip().lower()
            distractors = tuple(
                d.strip().lower() for d in fields[2].split(",") if d.strip()
            )
            if not word or not pos or not distractors:
                raise IngestionError(f"targets line {lineno}: empty field")
            out.append(TargetSpec(word, pos, distractors))
    if not out:
        raise IngestionError(f"targets file {path} has no rows")
    return out


def load_target_sentences(path) -> dict[str, list[str]]:
    """TSV rows of (target word, sentence), grouped by target, order kept."""
    if not Path(path).is_file():
        raise IngestionError(f"sentences file not found: {path}")
    out: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise IngestionError(
                    f"sentences line {lineno}: expected 2 tab-separated "
                    f"fields, got {len(fields)}"
                )
            word = fields[0].strip().lower()
            sentence = fields[1].strip()
            if not word or not sentence:
                raise IngestionError(f"sentences line {lineno}: empty field")
            out.setdefault(word, []).append(sentence)
    if not out:
        raise IngestionError(f"sentences file {path} has no rows")
    return out
