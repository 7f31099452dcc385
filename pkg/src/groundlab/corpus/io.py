"""Corpus ingestion: caption JSONL files and the FVEC binary feature format.

Feature files carry the magic "FVEC1", a little-endian u32 count, a
little-endian u32 dim, then count*dim little-endian float32 values in
row-major order. Values are promoted to float64 on load; all downstream
arithmetic is 64-bit.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import IngestionError
from .vocab import tokenize

FVEC_MAGIC = b"FVEC1"


@dataclass(frozen=True)
class CaptionRecord:
    """One caption plus the row index of its visual feature vector."""

    id: str
    caption: str
    fvec_index: int


# -- FVEC binary format -------------------------------------------------------


def write_fvec_block(fh, matrix: np.ndarray) -> None:
    """Write one FVEC block (magic, count, dim, float32 payload) to `fh`."""
    m = np.ascontiguousarray(matrix, dtype=np.float32)
    if m.ndim != 2:
        raise IngestionError(f"feature matrix must be 2-d, got shape {m.shape}")
    fh.write(FVEC_MAGIC)
    fh.write(struct.pack("<II", m.shape[0], m.shape[1]))
    fh.write(m.astype("<f4").tobytes())


def read_fvec_block(fh) -> np.ndarray:
    """Read one FVEC block from `fh`, promoted to float64."""
    magic = fh.read(len(FVEC_MAGIC))
    if magic != FVEC_MAGIC:
        raise IngestionError(
            f"bad feature-block magic {magic!r}, expected {FVEC_MAGIC!r}"
        )
    header = fh.read(8)
    if len(header) != 8:
        raise IngestionError("truncated feature-block header")
    count, dim = struct.unpack("<II", header)
    payload = fh.read(count * dim * 4)
    if len(payload) != count * dim * 4:
        raise IngestionError(
            f"truncated feature payload: wanted {count * dim * 4} bytes, "
            f"got {len(payload)}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(count, dim)
    return data.astype(np.float64)


def write_fvec(path, matrix: np.ndarray) -> None:
    with open(path, "wb") as fh:
        write_fvec_block(fh, matrix)


def read_fvec(path) -> np.ndarray:
    if not Path(path).is_file():
        raise IngestionError(f"feature file not found: {path}")
    with open(path, "rb") as fh:
        out = read_fvec_block(fh)
        if fh.read(1):
            raise IngestionError(f"{path}: trailing bytes after feature payload")
    return out


# -- caption JSONL ------------------------------------------------------------


def write_captions(path, records: list[CaptionRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {"id": rec.id, "caption": rec.caption, "fvec_index": rec.fvec_index},
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )


def _parse_caption_line(line: str, lineno: int) -> CaptionRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise IngestionError(f"caption line {lineno}: invalid record ({exc.msg})")
    if not isinstance(obj, dict):
        raise IngestionError(f"caption line {lineno}: expected an object")
    try:
        rid, caption, idx = obj["id"], obj["caption"], obj["fvec_index"]
    except KeyError as exc:
        raise IngestionError(f"caption line {lineno}: missing key {exc.args[0]}")
    if not isinstance(rid, str) or not isinstance(caption, str):
        raise IngestionError(f"caption line {lineno}: id and caption must be strings")
    if not isinstance(idx, int) or isinstance(idx, bool):
        raise IngestionError(f"caption line {lineno}: fvec_index must be an integer")
    return CaptionRecord(id=rid, caption=caption, fvec_index=idx)


def load_corpus(
    jsonl_path,
    fvec_path,
    token_budget: int | None = None,
) -> tuple[list[CaptionRecord], np.ndarray]:
    """Load caption records and their feature matrix, truncated to a budget.

    The budget counts tokenizer-emitted caption tokens (no specials);
    loading stops at the first record that would push the running total
    past `token_budget`. None means unlimited.
    """
    if not Path(jsonl_path).is_file():
        raise IngestionError(f"caption file not found: {jsonl_path}")
    features = read_fvec(fvec_path)
    records: list[CaptionRecord] = []
    used = 0
    with open(jsonl_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = _parse_caption_line(line, lineno)
            toks = tokenize(rec.caption)
            if not toks:
                raise IngestionError(
                    f"record '{rec.id}': caption empty after normalization"
                )
            if not 0 <= rec.fvec_index < features.shape[0]:
                raise IngestionError(
                    f"record '{rec.id}': fvec_index {rec.fvec_index} outside "
                    f"feature file with {features.shape[0]} rows"
                )
            if token_budget is not None and used + len(toks) > token_budget:
                break
            used += len(toks)
            records.append(rec)
    return records, features
