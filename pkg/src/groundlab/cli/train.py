"""Config-driven training: corpus -> examples -> AdamW epochs -> checkpoint."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..benchmarks import derive_split
from ..corpus import build_vocab, load_corpus, make_examples
from ..errors import TrainingError
from ..models import (
    FusionConfig,
    ModelState,
    TransformerConfig,
    clamp_logit_scale,
    init_model,
    loss_clip,
    loss_next_token,
    save_checkpoint,
)
from ..numcore import OptimizerState, adamw_step, backward, lr_at, named_grads
from ..seeding import derive_seed, substream
from .config import RunConfig


@dataclass
class TrainOutcome:
    state: ModelState
    checkpoint_path: str
    log_path: str
    epochs_run: int
    history: list[tuple[int, float, float]]  # (epoch, train_loss, eval_loss)


def _batches(indices: np.ndarray, batch_size: int):
    for start in range(0, len(indices), batch_size):
        yield indices[start : start + batch_size]


def _loss_fn(fusion: str):
    return loss_clip if fusion == "clip_contrastive" else loss_next_token


def _mean_loss(state, examples, index_groups, fusion: str) -> float:
    """Example-weighted mean loss over batches, without touching weights."""
    loss_fn = _loss_fn(fusion)
    total, count = 0.0, 0
    for batch in index_groups:
        group = [examples[i] for i in batch]
        total += float(loss_fn(state, group).data) * len(group)
        count += len(group)
    return total / count


def run_training(cfg: RunConfig) -> TrainOutcome:
    """Train per the config; write checkpoint.bin and loss_log.csv under cfg.out.

    The checkpoint on disk is always the last finished epoch (the freshly
    initialized weights before epoch 1), so a non-finite loss aborts the run
    while leaving the last good checkpoint in place.
    """
    cfg.validate()
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)

    records, features = load_corpus(cfg.captions, cfg.features, cfg.token_budget)
    if not records:
        raise TrainingError("token budget admits no caption records")
    vocab = build_vocab(records)
    feats = features if cfg.fusion != "none" else None
    examples = make_examples(
        records, vocab, cfg.regime, context_width=cfg.context_width, features=feats
    )
    if not examples:
        raise TrainingError("corpus produced no training examples")

    tcfg = TransformerConfig(
        vocab_size=vocab.size,
        n_layers=cfg.n_layers,
        hidden_dim=cfg.hidden_dim,
        n_heads=cfg.n_heads,
        ff_dim=cfg.ff_dim,
        max_seq_len=cfg.max_seq_len,
    )
    fcfg = FusionConfig(
        style=cfg.fusion,
        feature_dim=features.shape[1] if cfg.fusion != "none" else 0,
        n_latents=cfg.n_latents,
    )
    state = init_model(tcfg, fcfg, vocab, seed=derive_seed(cfg.seed, "init"), regime=cfg.regime)
    opt = OptimizerState(weight_decay=cfg.weight_decay)
    loss_fn = _loss_fn(cfg.fusion)

    train_idx, eval_idx = derive_split(
        "train_eval", cfg.seed, len(examples),
        fractions=(1.0 - cfg.eval_fraction, cfg.eval_fraction),
    )
    if len(train_idx) == 0 or len(eval_idx) == 0:
        raise TrainingError(
            f"{len(examples)} examples cannot support eval_fraction={cfg.eval_fraction}"
        )
    eval_batches = list(_batches(eval_idx, cfg.batch_size))

    epochs, _ = cfg.resolved_epochs()
    rng = substream(cfg.seed, "train")
    ckpt_path = outdir / "checkpoint.bin"
    log_path = outdir / "loss_log.csv"
    save_checkpoint(state, ckpt_path)

    history: list[tuple[int, float, float]] = []
    with open(log_path, "w", encoding="utf-8") as log:
        log.write("epoch,train_loss,eval_loss\n")
        for epoch in range(1, epochs + 1):
            order = rng.permutation(len(train_idx))
            total, count = 0.0, 0
            for batch in _batches(train_idx[order], cfg.batch_size):
                group = [examples[i] for i in batch]
                loss = loss_fn(state, group)
                value = float(loss.data)
                if not np.isfinite(value):
                    log.flush()
                    raise TrainingError(
                        f"non-finite loss at epoch {epoch} step {opt.step + 1}; "
                        f"last good checkpoint retained at {ckpt_path}"
                    )
                grads = named_grads(state.params, backward(loss))
                lr = lr_at(opt.step + 1, cfg.warmup_steps, cfg.peak_lr)
                adamw_step(state.params, grads, opt, lr=lr)
                if cfg.fusion == "clip_contrastive":
                    clamp_logit_scale(state)
                total += value * len(group)
                count += len(group)
            state.step = opt.step
            # weights are serialized as float32; a state that cannot survive
            # the round trip is divergence even while float64 losses are finite
            weight_limit = float(np.finfo(np.float32).max)
            healthy = all(
                np.all(np.abs(t.data) <= weight_limit)
                for t in state.params.values()
            )
            if not healthy:
                log.flush()
                raise TrainingError(
                    f"weights exceeded the representable range after epoch "
                    f"{epoch}; last good checkpoint retained at {ckpt_path}"
                )
            train_loss = total / count
            eval_loss = _mean_loss(state, examples, eval_batches, cfg.fusion)
            if not np.isfinite(eval_loss):
                log.flush()
                raise TrainingError(
                    f"non-finite eval loss after epoch {epoch}; "
                    f"last good checkpoint retained at {ckpt_path}"
                )
            history.append((epoch, train_loss, eval_loss))
            log.write(f"{epoch},{train_loss:.17g},{eval_loss:.17g}\n")
            log.flush()
            save_checkpoint(state, ckpt_path)

    return TrainOutcome(
        state=state,
        checkpoint_path=str(ckpt_path),
        log_path=str(log_path),
        epochs_run=epochs,
        history=history,
    )
