"""Training objectives: next-token cross-entropy and the contrastive loss."""

from __future__ import annotations

import math

import numpy as np

from .. import numcore as nc
from ..corpus.examples import TrainingExample
from ..corpus.vocab import PAD_ID
from ..errors import ContractError, NumericError
from .transformer import ModelState, _ln_affine, forward_lm

Array = np.ndarray


def pad_batch(examples: list[TrainingExample]) -> tuple[Array, Array | None, Array]:
    """Right-pad token sequences into [B, T]; stack fvecs when all present.

    Returns (tokens, fvecs-or-None, lengths).
    """
    if not examples:
        raise ContractError("empty batch")
    lengths = np.array([len(e.tokens) for e in examples])
    t = int(lengths.max())
    tokens = np.full((len(examples), t), PAD_ID, dtype=np.int64)
    for i, e in enumerate(examples):
        tokens[i, : lengths[i]] = e.tokens
    if all(e.fvec is not None for e in examples):
        fvecs = np.stack([e.fvec for e in examples]).astype(np.float64)
    else:
        fvecs = None
    return tokens, fvecs, lengths


def loss_next_token(state: ModelState, examples: list[TrainingExample]) -> nc.Tensor:
    """Mean cross-entropy of each next token, padding positions masked out."""
    tokens, fvecs, _ = pad_batch(examples)
    if tokens.shape[1] < 2:
        raise ContractError("next-token loss needs sequences of >= 2 tokens")
    inputs, targets = tokens[:, :-1], tokens[:, 1:]
    mask = (targets != PAD_ID).astype(np.float64)
    logits, _ = forward_lm(state, inputs, fvec=fvecs)
    v = state.tcfg.vocab_size
    return nc.cross_entropy(
        nc.reshape(logits, (-1, v)), targets.reshape(-1), mask.reshape(-1)
    )


def _l2_normalize(x: nc.Tensor, what: str) -> nc.Tensor:
    sq = nc.tsum(nc.mul(x, x), axis=-1, keepdims=True)
    norms = np.sqrt(sq.data).reshape(-1)
    bad = np.nonzero(norms < 1e-12)[0]
    if bad.size:
        raise NumericError(f"zero-norm {what} embedding for record {int(bad[0])}")
    return nc.div(x, nc.power(sq, 0.5))


def clip_loss_from_similarity(sim: nc.Tensor, scale: nc.Tensor | float) -> nc.Tensor:
    """Symmetric InfoNCE over an N x N similarity matrix times `scale`."""
    n = sim.shape[0]
    if sim.shape != (n, n):
        raise ContractError(f"similarity matrix must be square, got {sim.shape}")
    logits = nc.mul(sim, scale)
    targets = np.arange(n)
    per_text = nc.cross_entropy(logits, targets)
    per_image = nc.cross_entropy(nc.transpose(logits), targets)
    return nc.mul(nc.add(per_text, per_image), 0.5)


def pool_text(state: ModelState, tokens: Array, lengths: Array) -> nc.Tensor:
    """Final-layer hidden state at each sequence's last non-pad token,
    layer-normed and projected into feature space."""
    _, hiddens = forward_lm(state, tokens, text_only=True)
    last = nc.take_positions(hiddens[-1], lengths - 1)
    final = _ln_affine(last, state.params["ln_f.g"], state.params["ln_f.b"])
    return nc.matmul(final, state.params["clip.text_proj"])


def loss_clip(
    state: ModelState,
    examples: list[TrainingExample],
    temperature: float | None = None,
) -> nc.Tensor:
    """Contrastive text-image loss over a batch of (tokens, fvec) pairs.

    Cosine similarities between L2-normalized pooled text and image
    embeddings are scaled by the learnable logit scale (or by
    1/temperature when one is forced) and fed to symmetric InfoNCE.
    """
    if state.fcfg.style != "clip_contrastive":
        raise ContractError("loss_clip requires the clip_contrastive fusion style")
    tokens, fvecs, lengths = pad_batch(examples)
    if fvecs is None:
        raise ContractError("loss_clip: every example needs a feature vector")
    text = _l2_normalize(pool_text(state, tokens, lengths), "text")
    image = _l2_normalize(nc.Tensor(fvecs), "image")
    sim = nc.matmul(text, nc.transpose(image))
    if temperature is not None:
        scale: nc.Tensor | float = 1.0 / temperature
    else:
        scale = nc.exp(state.params["clip.logit_scale"])
    return clip_loss_from_similarity(sim, scale)


MAX_LOGIT_SCALE = math.log(100.0)


def clamp_logit_scale(state: ModelState) -> None:
    """Keep the contrastive scale <= 100; applied after each optimizer step."""
    if "clip.logit_scale" in state.params:
        p = state.params["clip.logit_scale"]
        p.data = np.minimum(p.data, MAX_LOGIT_SCALE)
