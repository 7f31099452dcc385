"""Evaluation benchmarks over word, sentence, and response representations."""

from .brain import eval_brain_response
from .context import eval_context_understanding
from .datasets import (
    RELATION_LABELS,
    FeatureNormSet,
    RelatednessSet,
    RelationSet,
    ResponseSet,
    SentencePair,
    SentencePairSet,
    filter_relatedness_by_aoa,
    load_aoa,
    load_feature_norms,
    load_pos_tags,
    load_relatedness,
    load_relations,
    load_responses,
    load_sentence_pairs,
    write_sentence_pairs,
)
from .pos import eval_pos
from .relatedness import cosine_pair_sims, eval_relatedness
from .relation import eval_lexical_relation
from .report import (
    REPORT_VERSION,
    EvalReport,
    derive_split,
    select_layer,
    stratified_split,
)
from .semfeat import eval_semantic_features

__all__ = [
    "EvalReport",
    "FeatureNormSet",
    "RELATION_LABELS",
    "REPORT_VERSION",
    "RelatednessSet",
    "RelationSet",
    "ResponseSet",
    "SentencePair",
    "SentencePairSet",
    "cosine_pair_sims",
    "derive_split",
    "eval_brain_response",
    "eval_context_understanding",
    "eval_lexical_relation",
    "eval_pos",
    "eval_relatedness",
    "eval_semantic_features",
    "filter_relatedness_by_aoa",
    "load_aoa",
    "load_feature_norms",
    "load_pos_tags",
    "load_relatedness",
    "load_relations",
    "load_responses",
    "load_sentence_pairs",
    "select_layer",
    "stratified_split",
    "write_sentence_pairs",
]
