"""Transformer variants, fusion styles, objectives, and model persistence."""

from .checkpoint import CKPT_MAGIC, load_checkpoint, save_checkpoint
from .config import FUSION_STYLES, FusionConfig, TransformerConfig
from .losses import (
    MAX_LOGIT_SCALE,
    clamp_logit_scale,
    clip_loss_from_similarity,
    loss_clip,
    loss_next_token,
    pad_batch,
    pool_text,
)
from .reps import (
    RepTable,
    extract_sequence_reps,
    extract_word_reps,
    extract_words_matrix,
    n_rep_layers,
    sequence_logprob,
)
from .transformer import ModelState, forward_lm, init_model, perceiver_resample

__all__ = [
    "CKPT_MAGIC",
    "FUSION_STYLES",
    "FusionConfig",
    "MAX_LOGIT_SCALE",
    "ModelState",
    "RepTable",
    "TransformerConfig",
    "clamp_logit_scale",
    "clip_loss_from_similarity",
    "extract_sequence_reps",
    "extract_word_reps",
    "extract_words_matrix",
    "forward_lm",
    "init_model",
    "load_checkpoint",
    "loss_clip",
    "loss_next_token",
    "n_rep_layers",
    "pad_batch",
    "perceiver_resample",
    "pool_text",
    "save_checkpoint",
    "sequence_logprob",
]
