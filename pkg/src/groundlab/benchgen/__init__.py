"""Benchmark construction against a surprisal-scoring service."""

from .builder import (
    CRITERION_WEIGHT,
    DEFAULT_CANDIDATE_VOCAB_SIZE,
    BenchmarkBuild,
    CandidatePair,
    TargetSpec,
    build_benchmark,
    build_candidate_vocab,
    canonical_tokens,
    load_target_sentences,
    load_targets,
    make_pair,
    select_base_sentences,
)
from .scorer import BaseScorer, InProcessScorer, MockScorer, ScorerClient
from .server import serve_scorer

__all__ = [
    "BaseScorer",
    "BenchmarkBuild",
    "CRITERION_WEIGHT",
    "CandidatePair",
    "DEFAULT_CANDIDATE_VOCAB_SIZE",
    "InProcessScorer",
    "MockScorer",
    "ScorerClient",
    "TargetSpec",
    "build_benchmark",
    "build_candidate_vocab",
    "canonical_tokens",
    "load_target_sentences",
    "load_targets",
    "make_pair",
    "select_base_sentences",
    "serve_scorer",
]
