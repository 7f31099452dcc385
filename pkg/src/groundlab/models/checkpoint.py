"""Self-describing checkpoint container, version tag LGCKPT1.

Layout: magic "LGCKPT1", little-endian u32 header length, a canonical JSON
header (configs, vocabulary, regime, step, tensor names + shapes), then one
FVEC block per tensor in header order, each flattened to a single row.
Weights are stored as float32 like every other numeric file here.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .. import numcore as nc
from ..corpus.io import read_fvec_block, write_fvec_block
from ..corpus.vocab import Vocab
from ..errors import IngestionError
from .config import FusionConfig, TransformerConfig
from .transformer import ModelState

CKPT_MAGIC = b"LGCKPT1"


def save_checkpoint(state: ModelState, path) -> None:
    names = sorted(state.params)
    header = {
        "version": CKPT_MAGIC.decode(),
        "tcfg": state.tcfg.to_dict(),
        "fcfg": state.fcfg.to_dict(),
        "regime": state.regime,
        "step": state.step,
        "vocab": state.vocab.id_to_token,
        "tensors": [
            {"name": n, "shape": list(state.params[n].data.shape)} for n in names
        ],
    }
    blob = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for n in names:
            write_fvec_block(fh, state.params[n].data.reshape(1, -1))


def load_checkpoint(path) -> ModelState:
    if not Path(path).is_file():
        raise IngestionError(f"checkpoint file not found: {path}")
    with open(path, "rb") as fh:
        magic = fh.read(len(CKPT_MAGIC))
        if magic != CKPT_MAGIC:
            raise IngestionError(
                f"bad checkpoint magic {magic!r}, expected {CKPT_MAGIC!r}"
            )
        raw = fh.read(4)
        if len(raw) != 4:
            raise IngestionError("truncated checkpoint header length")
        (hlen,) = struct.unpack("<I", raw)
        blob = fh.read(hlen)
        if len(blob) != hlen:
            raise IngestionError("truncated checkpoint header")
        try:
            header = json.loads(blob.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise IngestionError(f"unreadable checkpoint header: {exc}")
        tcfg = TransformerConfig(**header["tcfg"])
        fcfg = FusionConfig(**header["fcfg"])
        tokens = list(header["vocab"])
        vocab = Vocab(
            id_to_token=tokens,
            token_to_id={t: i for i, t in enumerate(tokens)},
        )
        params: dict[str, nc.Tensor] = {}
        for spec in header["tensors"]:
            block = read_fvec_block(fh)
            shape = tuple(spec["shape"])
            want = int(np.prod(shape)) if shape else 1
            if block.size != want:
                raise IngestionError(
                    f"tensor '{spec['name']}': payload size {block.size} "
                    f"does not match shape {shape}"
                )
            params[spec["name"]] = nc.Tensor(
                block.reshape(shape), requires_grad=True
            )
        if fh.read(1):
            raise IngestionError("trailing bytes after checkpoint tensors")
    return ModelState(
        params=params,
        tcfg=tcfg,
        fcfg=fcfg,
        vocab=vocab,
        regime=header["regime"],
        step=int(header["step"]),
    )
