"""Model configuration types: transformer shape and fusion style."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import ContractError

FUSION_STYLES = ("none", "git_prefix", "clip_contrastive", "flamingo_xattn")


@dataclass(frozen=True)
class TransformerConfig:
    """Shape of the causal transformer; defaults match the full-scale setup."""

    vocab_size: int
    n_layers: int = 6
    hidden_dim: int = 768
    n_heads: int = 12
    ff_dim: int = 3072
    max_seq_len: int = 64
    tie_embeddings: bool = True

    def __post_init__(self):
        if self.vocab_size < 1:
            raise ContractError(f"vocab_size must be >= 1, got {self.vocab_size}")
        if self.hidden_dim % self.n_heads != 0:
            raise ContractError(
                f"hidden_dim {self.hidden_dim} not divisible by n_heads {self.n_heads}"
            )
        if min(self.n_layers, self.ff_dim, self.max_seq_len) < 1:
            raise ContractError("n_layers, ff_dim, max_seq_len must all be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FusionConfig:
    """How (and whether) visual features enter the model.

    none             text only
    git_prefix       one projected feature vector prepended as a pseudo-token
    clip_contrastive text encoder unchanged; features meet text in the loss
    flamingo_xattn   perceiver resampler + gated cross-attention blocks
    """

    style: str = "none"
    feature_dim: int = 0
    n_latents: int = 64
    resampler_layers: int = 2
    xattn_every: int = 1

    def __post_init__(self):
        if self.style not in FUSION_STYLES:
            raise ContractError(
                f"unknown fusion style '{self.style}', expected one of {FUSION_STYLES}"
            )
        if self.style != "none" and self.feature_dim < 1:
            raise ContractError(f"fusion style '{self.style}' requires feature_dim >= 1")
        if self.style == "flamingo_xattn":
            if self.n_latents < 1:
                raise ContractError(f"n_latents must be >= 1, got {self.n_latents}")
            if self.resampler_layers < 1 or self.xattn_every < 1:
                raise ContractError("resampler_layers and xattn_every must be >= 1")

    @property
    def consumes_fvec_in_forward(self) -> bool:
        return self.style in ("git_prefix", "flamingo_xattn")

    def to_dict(self) -> dict:
        return asdict(self)
