"""The causal transformer, its three fusion styles, and parameter init.

Pre-norm GPT-2-style blocks: h += attn(ln(h)); h += ff(ln(h)); GELU in the
feed-forward; learned positional embeddings; final layer norm before the
(tied) vocabulary projection. Fusion styles graft onto this skeleton:

* git_prefix prepends one projected feature vector as a pseudo-token that
  carries no positional embedding and is excluded from emitted positions.
* flamingo_xattn resamples visual tokens to a fixed latent set, then adds
  tanh-gated cross-attention + feed-forward after selected layers; gates
  start at zero, so an untrained fused model equals the text-only one.
* clip_contrastive leaves the text stream untouched — features meet the
  text in the contrastive loss only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import numcore as nc
from ..corpus.vocab import Vocab
from ..errors import ContractError
from ..seeding import substream
from .config import FusionConfig, TransformerConfig

Array = np.ndarray


@dataclass
class ModelState:
    """Parameters plus everything needed to reuse them: configs, vocab, step."""

    params: dict[str, nc.Tensor]
    tcfg: TransformerConfig
    fcfg: FusionConfig
    vocab: Vocab
    regime: str = "full_caption"
    step: int = 0


# -- initialization -----------------------------------------------------------


def _xavier(rng, fan_in: int, fan_out: int, shape) -> Array:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape)


def init_model(
    tcfg: TransformerConfig,
    fcfg: FusionConfig,
    vocab: Vocab,
    seed: int,
    regime: str = "full_caption",
) -> ModelState:
    """Seeded Xavier-uniform weights, zero biases, unit layer-norm gains.

    Parameter creation order is fixed, so a (config, seed) pair always
    yields bitwise-identical weights.
    """
    if tcfg.vocab_size != vocab.size:
        raise ContractError(
            f"config vocab_size {tcfg.vocab_size} != vocabulary size {vocab.size}"
        )
    rng = substream(seed, "init")
    d, f = tcfg.hidden_dim, tcfg.ff_dim
    p: dict[str, nc.Tensor] = {}

    def param(name: str, data: Array) -> None:
        p[name] = nc.Tensor(data, requires_grad=True)

    param("emb.tok", _xavier(rng, tcfg.vocab_size, d, (tcfg.vocab_size, d)))
    param("emb.pos", _xavier(rng, tcfg.max_seq_len, d, (tcfg.max_seq_len, d)))
    for i in range(tcfg.n_layers):
        pre = f"layer{i}"
        param(f"{pre}.ln1.g", np.ones(d))
        param(f"{pre}.ln1.b", np.zeros(d))
        for nm in ("wq", "wk", "wv", "wo"):
            param(f"{pre}.attn.{nm}", _xavier(rng, d, d, (d, d)))
            param(f"{pre}.attn.b{nm[1]}", np.zeros(d))
        param(f"{pre}.ln2.g", np.ones(d))
        param(f"{pre}.ln2.b", np.zeros(d))
        param(f"{pre}.ff.w1", _xavier(rng, d, f, (d, f)))
        param(f"{pre}.ff.b1", np.zeros(f))
        param(f"{pre}.ff.w2", _xavier(rng, f, d, (f, d)))
        param(f"{pre}.ff.b2", np.zeros(d))
    param("ln_f.g", np.ones(d))
    param("ln_f.b", np.zeros(d))
    if not tcfg.tie_embeddings:
        param("head.w", _xavier(rng, d, tcfg.vocab_size, (d, tcfg.vocab_size)))

    fd = fcfg.feature_dim
    if fcfg.style == "git_prefix":
        param("git.proj.w", _xavier(rng, fd, d, (fd, d)))
        param("git.proj.b", np.zeros(d))
    elif fcfg.style == "clip_contrastive":
        param("clip.text_proj", _xavier(rng, d, fd, (d, fd)))
        param("clip.logit_scale", np.asarray(math.log(1.0 / 0.07)))
    elif fcfg.style == "flamingo_xattn":
        param("rs.latents", _xavier(rng, fcfg.n_latents, fd, (fcfg.n_latents, fd)))
        for r in range(fcfg.resampler_layers):
            pre = f"rs.l{r}"
            param(f"{pre}.ln_q.g", np.ones(fd))
            param(f"{pre}.ln_q.b", np.zeros(fd))
            param(f"{pre}.ln_kv.g", np.ones(fd))
            param(f"{pre}.ln_kv.b", np.zeros(fd))
            for nm in ("wq", "wk", "wv", "wo"):
                param(f"{pre}.attn.{nm}", _xavier(rng, fd, fd, (fd, fd)))
                param(f"{pre}.attn.b{nm[1]}", np.zeros(fd))
            param(f"{pre}.ln_ff.g", np.ones(fd))
            param(f"{pre}.ln_ff.b", np.zeros(fd))
            param(f"{pre}.ff.w1", _xavier(rng, fd, 4 * fd, (fd, 4 * fd)))
            param(f"{pre}.ff.b1", np.zeros(4 * fd))
            param(f"{pre}.ff.w2", _xavier(rng, 4 * fd, fd, (4 * fd, fd)))
            param(f"{pre}.ff.b2", np.zeros(fd))
        for i in range(tcfg.n_layers):
            if (i + 1) % fcfg.xattn_every != 0:
                continue
            pre = f"xattn.l{i}"
            param(f"{pre}.ln_q.g", np.ones(d))
            param(f"{pre}.ln_q.b", np.zeros(d))
            param(f"{pre}.attn.wq", _xavier(rng, d, d, (d, d)))
            param(f"{pre}.attn.bq", np.zeros(d))
            param(f"{pre}.attn.wk", _xavier(rng, fd, d, (fd, d)))
            param(f"{pre}.attn.bk", np.zeros(d))
            param(f"{pre}.attn.wv", _xavier(rng, fd, d, (fd, d)))
            param(f"{pre}.attn.bv", np.zeros(d))
            param(f"{pre}.attn.wo", _xavier(rng, d, d, (d, d)))
            param(f"{pre}.attn.bo", np.zeros(d))
            param(f"{pre}.gate_attn", np.asarray(0.0))
            param(f"{pre}.ln_ff.g", np.ones(d))
            param(f"{pre}.ln_ff.b", np.zeros(d))
            param(f"{pre}.ff.w1", _xavier(rng, d, f, (d, f)))
            param(f"{pre}.ff.b1", np.zeros(f))
            param(f"{pre}.ff.w2", _xavier(rng, f, d, (f, d)))
            param(f"{pre}.ff.b2", np.zeros(d))
            param(f"{pre}.gate_ff", np.asarray(0.0))

    return ModelState(params=p, tcfg=tcfg, fcfg=fcfg, vocab=vocab, regime=regime)


# -- building blocks -----------------------------------------------------------


def _ln_affine(x, g, b):
    return nc.add(nc.mul(nc.layer_norm(x), g), b)


def _linear(x, w, b=None):
    out = nc.matmul(x, w)
    return out if b is None else nc.add(out, b)


def _split_heads(x, n_heads: int):
    b, t, d = x.shape
    return nc.transpose(nc.reshape(x, (b, t, n_heads, d // n_heads)), (0, 2, 1, 3))


def _merge_heads(x):
    b, h, t, dh = x.shape
    return nc.reshape(nc.transpose(x, (0, 2, 1, 3)), (b, t, h * dh))


def _attention(q, k, v, n_heads: int, mask: Array | None = None):
    """Scaled dot-product attention over already-projected q/k/v in [B,T,D]."""
    dh = q.shape[-1] // n_heads
    qh, kh, vh = (_split_heads(x, n_heads) for x in (q, k, v))
    scores = nc.mul(nc.matmul(qh, nc.swap_last2(kh)), 1.0 / math.sqrt(dh))
    if mask is not None:
        scores = nc.add(scores, mask)
    return _merge_heads(nc.matmul(nc.softmax(scores, axis=-1), vh))


def _causal_mask(t: int) -> Array:
    return np.triu(np.full((t, t), -1e9), k=1)


def _self_attn_block(p, pre: str, h, n_heads: int, mask: Array):
    x = _ln_affine(h, p[f"{pre}.ln1.g"], p[f"{pre}.ln1.b"])
    q = _linear(x, p[f"{pre}.attn.wq"], p[f"{pre}.attn.bq"])
    k = _linear(x, p[f"{pre}.attn.wk"], p[f"{pre}.attn.bk"])
    v = _linear(x, p[f"{pre}.attn.wv"], p[f"{pre}.attn.bv"])
    o = _attention(q, k, v, n_heads, mask)
    h = nc.add(h, _linear(o, p[f"{pre}.attn.wo"], p[f"{pre}.attn.bo"]))
    x = _ln_affine(h, p[f"{pre}.ln2.g"], p[f"{pre}.ln2.b"])
    ff = _linear(nc.gelu(_linear(x, p[f"{pre}.ff.w1"], p[f"{pre}.ff.b1"])),
                 p[f"{pre}.ff.w2"], p[f"{pre}.ff.b2"])
    return nc.add(h, ff)


def perceiver_resample(state: ModelState, features) -> nc.Tensor:
    """Cross-attend a learned latent array to visual tokens.

    `features` is [tokens, dim] or [batch, tokens, dim]; the result has
    n_latents rows per instance regardless of the input token count.
    """
    if state.fcfg.style != "flamingo_xattn":
        raise ContractError("perceiver_resample requires the flamingo_xattn style")
    x = features if isinstance(features, nc.Tensor) else nc.Tensor(features)
    squeeze = x.ndim == 2
    if squeeze:
        x = nc.reshape(x, (1,) + x.shape)
    if x.ndim != 3 or x.shape[1] == 0:
        raise ContractError(
            f"visual tokens must be a nonempty [tokens, dim] array, got {x.shape}"
        )
    p = state.params
    fd = state.fcfg.feature_dim
    lat = p["rs.latents"]
    for r in range(state.fcfg.resampler_layers):
        pre = f"rs.l{r}"
        qn = _ln_affine(lat, p[f"{pre}.ln_q.g"], p[f"{pre}.ln_q.b"])
        kv = _ln_affine(x, p[f"{pre}.ln_kv.g"], p[f"{pre}.ln_kv.b"])
        q = _linear(qn, p[f"{pre}.attn.wq"], p[f"{pre}.attn.bq"])
        k = _linear(kv, p[f"{pre}.attn.wk"], p[f"{pre}.attn.bk"])
        v = _linear(kv, p[f"{pre}.attn.wv"], p[f"{pre}.attn.bv"])
        scores = nc.mul(nc.matmul(q, nc.swap_last2(k)), 1.0 / math.sqrt(fd))
        att = nc.matmul(nc.softmax(scores, axis=-1), v)
        lat = nc.add(lat, _linear(att, p[f"{pre}.attn.wo"], p[f"{pre}.attn.bo"]))
        xn = _ln_affine(lat, p[f"{pre}.ln_ff.g"], p[f"{pre}.ln_ff.b"])
        ff = _linear(nc.gelu(_linear(xn, p[f"{pre}.ff.w1"], p[f"{pre}.ff.b1"])),
                     p[f"{pre}.ff.w2"], p[f"{pre}.ff.b2"])
        lat = nc.add(lat, ff)
    # the first residual broadcast promotes lat to [B, n_latents, dim]
    return nc.reshape(lat, lat.shape[1:]) if squeeze else lat


def _gated_xattn_block(p, pre: str, h, resampled, n_heads: int):
    x = _ln_affine(h, p[f"{pre}.ln_q.g"], p[f"{pre}.ln_q.b"])
    q = _linear(x, p[f"{pre}.attn.wq"], p[f"{pre}.attn.bq"])
    k = _linear(resampled, p[f"{pre}.attn.wk"], p[f"{pre}.attn.bk"])
    v = _linear(resampled, p[f"{pre}.attn.wv"], p[f"{pre}.attn.bv"])
    o = _linear(_attention(q, k, v, n_heads), p[f"{pre}.attn.wo"], p[f"{pre}.attn.bo"])
    h = nc.add(h, nc.mul(nc.tanh(p[f"{pre}.gate_attn"]), o))
    xn = _ln_affine(h, p[f"{pre}.ln_ff.g"], p[f"{pre}.ln_ff.b"])
    ff = _linear(nc.gelu(_linear(xn, p[f"{pre}.ff.w1"], p[f"{pre}.ff.b1"])),
                 p[f"{pre}.ff.w2"], p[f"{pre}.ff.b2"])
    return nc.add(h, nc.mul(nc.tanh(p[f"{pre}.gate_ff"]), ff))


# -- forward pass --------------------------------------------------------------


def forward_lm(
    state: ModelState,
    tokens: Array,
    fvec: Array | None = None,
    text_only: bool = False,
) -> tuple[nc.Tensor, list[nc.Tensor]]:
    """Causal forward pass: logits per position plus per-layer hidden states.

    tokens is [T] or [B, T] int ids; fvec is [feature_dim] or
    [B, feature_dim] and is mandatory for fusion styles that consume one.
    `text_only=True` runs the bare text stream of any model (used when
    scoring or extracting representations without an image). Hidden states
    cover the embedding layer plus every block, fusion effects included,
    always excluding the git prefix position.
    """
    tokens = np.asarray(tokens)
    squeeze = tokens.ndim == 1
    if squeeze:
        tokens = tokens[None, :]
    if tokens.ndim != 2:
        raise ContractError(f"tokens must be [T] or [B, T], got shape {tokens.shape}")
    bsz, t = tokens.shape
    tcfg, fcfg, p = state.tcfg, state.fcfg, state.params
    if t > tcfg.max_seq_len:
        raise ContractError(
            f"sequence length {t} exceeds max_seq_len {tcfg.max_seq_len}"
        )
    if tokens.min() < 0 or tokens.max() >= tcfg.vocab_size:
        raise ContractError("token id outside vocabulary range")

    fused = fcfg.consumes_fvec_in_forward and not text_only
    if fused and fvec is None:
        raise ContractError(f"fusion style '{fcfg.style}' requires an fvec")
    if fused:
        fv = np.asarray(fvec, dtype=np.float64)
        if fv.ndim == 1:
            fv = np.broadcast_to(fv, (bsz, fv.shape[0])).copy()
        if fv.shape != (bsz, fcfg.feature_dim):
            raise ContractError(
                f"fvec shape {fv.shape} does not match "
                f"(batch {bsz}, feature_dim {fcfg.feature_dim})"
            )

    emb = nc.add(
        nc.embedding(p["emb.tok"], tokens),
        nc.embedding(p["emb.pos"], np.arange(t)),
    )
    hiddens = [emb]
    h = emb
    prefix = 0
    resampled = None
    if fused and fcfg.style == "git_prefix":
        proj = nc.add(nc.matmul(nc.Tensor(fv), p["git.proj.w"]), p["git.proj.b"])
        h = nc.concat([nc.reshape(proj, (bsz, 1, tcfg.hidden_dim)), h], axis=1)
        prefix = 1
    elif fused and fcfg.style == "flamingo_xattn":
        resampled = perceiver_resample(state, fv[:, None, :])

    mask = _causal_mask(t + prefix)
    for i in range(tcfg.n_layers):
        h = _self_attn_block(p, f"layer{i}", h, tcfg.n_heads, mask)
        if resampled is not None and (i + 1) % fcfg.xattn_every == 0:
            h = _gated_xattn_block(p, f"xattn.l{i}", h, resampled, tcfg.n_heads)
        hiddens.append(nc.slice_axis(h, 1, prefix, prefix + t) if prefix else h)

    final = _ln_affine(hiddens[-1], p["ln_f.g"], p["ln_f.b"])
    if tcfg.tie_embeddings:
        logits = nc.matmul(final, nc.transpose(p["emb.tok"]))
    else:
        logits = nc.matmul(final, p["head.w"])
    if squeeze:
        logits = nc.reshape(logits, logits.shape[1:])
        hiddens = [nc.reshape(hh, hh.shape[1:]) for hh in hiddens]
    return logits, hiddens
