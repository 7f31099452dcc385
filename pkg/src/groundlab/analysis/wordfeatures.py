"""Loader for per-word feature tables (concreteness, acquisition age, ...)."""

from __future__ import annotations

import csv

import numpy as np

from ..corpus.vocab import normalize
from ..errors import IngestionError

WordFeatureTable = dict[str, dict[str, float]]


def load_word_features(path) -> WordFeatureTable:
    """TSV rows of (word, feature_name, value) -> word -> {feature: value}."""
    table: WordFeatureTable = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise IngestionError(
                    f"word features line {lineno}: expected 3 tab-separated "
                    f"fields, got {len(fields)}"
                )
            word = normalize(fields[0])
            feature = fields[1].strip().lower()
            if not word or not feature:
                raise IngestionError(f"word features line {lineno}: empty field")
            try:
                value = float(fields[2])
            except ValueError:
                raise IngestionError(
                    f"word features line {lineno}: {fields[2]!r} is not a number"
                ) from None
            if not np.isfinite(value):
                raise IngestionError(
                    f"word features line {lineno}: non-finite value"
                )
            if feature in table.get(word, {}):
                raise IngestionError(
                    f"word features line {lineno}: duplicate entry "
                    f"({word!r}, {feature!r})"
                )
            table.setdefault(word, {})[feature] = value
    if not table:
        raise IngestionError(f"word features file {path} has no rows")
    return table


def write_pair_csv(pairs, path) -> None:
    """Flat per-pair records for plotting: one row per PairLikeness."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["word1", "word2", "model_rank", "human_rank", "normalized_rank"]
        )
        for p in pairs:
            writer.writerow(
                [p.pair[0], p.pair[1], p.model_rank, p.human_rank, p.normalized_rank]
            )
