"""Post-hoc analyses: human-likeness ranks, feature regressions, agreement."""

from .compare import (
    cross_seed_self_correlation,
    model_model_corr,
    per_word_map_difference,
    split_scores,
)
from .likeness import (
    PairLikeness,
    RegressionResult,
    human_likeness,
    regress_likeness,
    regress_word_values,
)
from .wordfeatures import WordFeatureTable, load_word_features, write_pair_csv

__all__ = [
    "PairLikeness",
    "RegressionResult",
    "WordFeatureTable",
    "cross_seed_self_correlation",
    "human_likeness",
    "load_word_features",
    "model_model_corr",
    "per_word_map_difference",
    "regress_likeness",
    "regress_word_values",
    "split_scores",
    "write_pair_csv",
]
