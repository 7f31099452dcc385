"""Word-level tokenizer and vocabulary.

Captions are lowercased, control characters become spaces, whitespace is
collapsed, and tokens are maximal word characters or single punctuation
marks. Four special ids sit at the bottom of every vocabulary:
[CLS]=0, [PAD]=1, [UNK]=2, [BOS]=3.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from ..errors import ContractError

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")
_CONTROL_RE = re.compile(r"[\x00-\x1f\x7f-\x9f]")

CLS_TOKEN, PAD_TOKEN, UNK_TOKEN, BOS_TOKEN = "[CLS]", "[PAD]", "[UNK]", "[BOS]"
SPECIAL_TOKENS = (CLS_TOKEN, PAD_TOKEN, UNK_TOKEN, BOS_TOKEN)
CLS_ID, PAD_ID, UNK_ID, BOS_ID = 0, 1, 2, 3


def normalize(text: str) -> str:
    """Lowercase, replace control characters with spaces, collapse runs."""
    text = _CONTROL_RE.sub(" ", text.lower())
    return " ".join(text.split())


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(normalize(text))


@dataclass
class Vocab:
    """Bijective token<->id map with the four fixed specials at ids 0-3."""

    id_to_token: list[str]
    token_to_id: dict[str, int] = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    def encode_tokens(self, tokens: list[str]) -> list[int]:
        t2i = self.token_to_id
        return [t2i.get(tok, UNK_ID) for tok in tokens]

    def encode(self, text: str) -> list[int]:
        return self.encode_tokens(tokenize(text))

    def decode(self, ids) -> str:
        return " ".join(self.id_to_token[int(i)] for i in ids)

    def word_id(self, word: str) -> int:
        """Id of a single-token word; multi-token input is a contract error."""
        ids = self.encode(word)
        if len(ids) != 1:
            raise ContractError(
                f"expected a single-token word, got {len(ids)} tokens for {word!r}"
            )
        return ids[0]

    def is_special(self, token_id: int) -> bool:
        return token_id < len(SPECIAL_TOKENS)


def build_vocab(records, min_count: int = 1) -> Vocab:
    """Count word tokens over all captions and keep those seen >= min_count.

    Content ids follow the specials, ordered by descending frequency with
    alphabetical tie-breaks so construction is deterministic.
    """
    if min_count < 1:
        raise ContractError(f"min_count must be >= 1, got {min_count}")
    counts: Counter[str] = Counter()
    for rec in records:
        counts.update(tokenize(rec.caption))
    if not counts:
        raise ContractError("cannot build a vocabulary from an empty corpus")
    kept = sorted(
        (tok for tok, n in counts.items() if n >= min_count),
        key=lambda tok: (-counts[tok], tok),
    )
    id_to_token = list(SPECIAL_TOKENS) + kept
    token_to_id = {tok: i for i, tok in enumerate(id_to_token)}
    return Vocab(id_to_token=id_to_token, token_to_id=token_to_id)
