"""Corpus ingestion, tokenization, labeling regimes, and the synthetic world."""

from .examples import REGIMES, TrainingExample, make_examples, mean_word_features
from .io import (
    FVEC_MAGIC,
    CaptionRecord,
    load_corpus,
    read_fvec,
    read_fvec_block,
    write_captions,
    write_fvec,
    write_fvec_block,
)
from .synth import ATTRIBUTES, SynthWorld, synth_world, write_world
from .vocab import (
    BOS_ID,
    BOS_TOKEN,
    CLS_ID,
    CLS_TOKEN,
    PAD_ID,
    PAD_TOKEN,
    SPECIAL_TOKENS,
    UNK_ID,
    UNK_TOKEN,
    Vocab,
    build_vocab,
    normalize,
    tokenize,
)

__all__ = [
    "ATTRIBUTES",
    "BOS_ID",
    "BOS_TOKEN",
    "CLS_ID",
    "CLS_TOKEN",
    "CaptionRecord",
    "FVEC_MAGIC",
    "PAD_ID",
    "PAD_TOKEN",
    "REGIMES",
    "SPECIAL_TOKENS",
    "SynthWorld",
    "TrainingExample",
    "UNK_ID",
    "UNK_TOKEN",
    "Vocab",
    "build_vocab",
    "load_corpus",
    "make_examples",
    "mean_word_features",
    "normalize",
    "read_fvec",
    "read_fvec_block",
    "synth_world",
    "tokenize",
    "write_captions",
    "write_fvec",
    "write_fvec_block",
    "write_world",
]
