"""Argument parsing and dispatch for the groundlab command-line tool.

Exit codes: 0 success, 1 runtime failure (GroundlabError), 2 usage or
contract violation (ContractError, bad flags).
"""

from __future__ import annotations

import argparse
import sys

from ..errors import ContractError, GroundlabError
from .commands import (
    BENCHMARKS,
    cmd_analyze,
    cmd_benchgen,
    cmd_eval,
    cmd_sweep,
    cmd_synth,
    cmd_train,
)
from .manifest import TOOL_VERSION

_RUN_FLAGS = (
    ("captions", str),
    ("features", str),
    ("regime", str),
    ("fusion", str),
    ("token_budget", int),
    ("epochs", int),
    ("batch_size", int),
    ("peak_lr", float),
    ("warmup_steps", int),
    ("weight_decay", float),
    ("eval_fraction", float),
    ("context_width", int),
    ("n_layers", int),
    ("hidden_dim", int),
    ("n_heads", int),
    ("ff_dim", int),
    ("max_seq_len", int),
    ("n_latents", int),
)


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    for name, ftype in _RUN_FLAGS:
        parser.add_argument(f"--{name.replace('_', '-')}", type=ftype, default=None)


def _comma_list(cast):
    def parse(text: str):
        items = [part.strip() for part in text.split(",") if part.strip()]
        return [cast(item) for item in items]

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="INI config file")
    common.add_argument("--seed", type=int, default=None, help="master random seed")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument(
        "--threads", type=int, default=1, help="concurrent sweep cells"
    )

    parser = argparse.ArgumentParser(
        prog="groundlab",
        description="Train, evaluate, and analyze word-grounding language models.",
    )
    parser.add_argument(
        "--version", action="version", version=f"groundlab {TOOL_VERSION}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", parents=[common], help="train one model")
    _add_run_flags(train)

    evalp = sub.add_parser(
        "eval", parents=[common], help="run one benchmark on a checkpoint"
    )
    evalp.add_argument("--checkpoint", required=True)
    evalp.add_argument("--benchmark", required=True, choices=BENCHMARKS)
    evalp.add_argument("--splits", type=int, default=None)
    evalp.add_argument("--pairs", help="relatedness pairs TSV")
    evalp.add_argument("--aoa", help="word age-of-acquisition TSV")
    evalp.add_argument("--max-age", type=float, default=10.0)
    evalp.add_argument("--category", default=None)
    evalp.add_argument("--relations", help="lexical relation pairs TSV")
    evalp.add_argument("--norms", help="semantic feature norms TSV")
    evalp.add_argument("--tags", help="word part-of-speech TSV")
    evalp.add_argument("--sentence-pairs", help="minimal sentence pairs TSV")
    evalp.add_argument("--segment-width", type=int, default=3)
    evalp.add_argument("--captions", help="captions JSONL (matching proxy)")
    evalp.add_argument("--features", help="features FVEC (matching proxy)")
    evalp.add_argument("--sentences", help="stimulus sentences, one per line")
    evalp.add_argument("--responses", help="response matrix FVEC")
    evalp.add_argument("--ceilings", help="per-channel noise ceilings TSV")

    sweep = sub.add_parser(
        "sweep", parents=[common], help="train and evaluate a grid"
    )
    _add_run_flags(sweep)
    sweep.add_argument(
        "--variants", type=_comma_list(str), required=True,
        help="comma list of model variants (or regime:fusion pairs)",
    )
    sweep.add_argument(
        "--scales", type=_comma_list(int), required=True,
        help="comma list of token budgets",
    )
    sweep.add_argument(
        "--seeds", type=_comma_list(int), required=True,
        help="comma list of seeds",
    )
    sweep.add_argument("--pairs", help="relatedness pairs TSV")
    sweep.add_argument("--relations", help="lexical relation pairs TSV")
    sweep.add_argument("--norms", help="semantic feature norms TSV")
    sweep.add_argument("--tags", help="word part-of-speech TSV")

    bgen = sub.add_parser(
        "benchgen", parents=[common], help="build a minimal-pair benchmark"
    )
    bgen.add_argument("--targets", required=True, help="target/distractor TSV")
    bgen.add_argument("--sentences", required=True, help="target sentence pool TSV")
    bgen.add_argument("--checkpoint", help="score with this checkpoint in-process")
    bgen.add_argument("--endpoint", help="score against this HTTP service")
    bgen.add_argument("--mock", action="store_true", help="length-based mock scorer")
    bgen.add_argument("--per-token", action="store_true")
    bgen.add_argument("--vocab-size", type=int, default=200)
    bgen.add_argument("--n-per-pair", type=int, default=20)
    bgen.add_argument("--cache-in", help="surprisal cache to preload")
    bgen.add_argument("--cache-out", help="write the surprisal cache here")
    bgen.add_argument("--timeout", type=float, default=30.0)

    analyze = sub.add_parser(
        "analyze", parents=[common], help="model-vs-human agreement analysis"
    )
    analyze.add_argument("--model-pairs", required=True)
    analyze.add_argument("--human-pairs", required=True)
    analyze.add_argument("--word-features", default=None)
    analyze.add_argument("--feature", default=None)

    synth = sub.add_parser(
        "synth", parents=[common], help="generate a synthetic grounded corpus"
    )
    synth.add_argument("--n-pairs", type=int, required=True)
    synth.add_argument("--vocab-size", type=int, default=48)
    synth.add_argument("--feature-dim", type=int, default=32)
    synth.add_argument("--noise", type=float, default=1.0)
    synth.add_argument("--value-corr", type=float, default=0.5)
    synth.add_argument("--restate-prob", type=float, default=0.5)

    return parser


def _require_out(args) -> str:
    if args.out is None:
        raise ContractError(f"{args.command} requires --out")
    return args.out


def _dispatch(args) -> None:
    if args.command == "train":
        overrides = {name: getattr(args, name) for name, _ in _RUN_FLAGS}
        overrides["seed"] = args.seed
        overrides["out"] = args.out
        manifest = cmd_train(args.config, overrides)
        print(f"train: wrote {manifest.artifacts['checkpoint']} under {args.out or 'config out'}")
    elif args.command == "eval":
        manifest, report = cmd_eval(
            args.checkpoint,
            args.benchmark,
            _require_out(args),
            seed=args.seed if args.seed is not None else 0,
            splits=args.splits,
            pairs=args.pairs,
            aoa=args.aoa,
            max_age=args.max_age,
            category=args.category,
            relations=args.relations,
            norms=args.norms,
            tags=args.tags,
            sentence_pairs=args.sentence_pairs,
            segment_width=args.segment_width,
            captions=args.captions,
            features=args.features,
            sentences=args.sentences,
            responses=args.responses,
            ceilings=args.ceilings,
        )
        print(
            f"eval {args.benchmark}: score={report.final_score:.6g} "
            f"layer={report.selected_layer}"
        )
    elif args.command == "sweep":
        overrides = {name: getattr(args, name) for name, _ in _RUN_FLAGS}
        overrides["seed"] = args.seed
        manifest = cmd_sweep(
            args.config,
            overrides,
            variants=args.variants,
            scales=args.scales,
            seeds=args.seeds,
            out=_require_out(args),
            threads=args.threads,
            pairs=args.pairs,
            relations=args.relations,
            norms=args.norms,
            tags=args.tags,
        )
        print(
            f"sweep: {manifest.extra['n_rows']} rows, "
            f"{manifest.extra['n_failures']} failures"
        )
    elif args.command == "benchgen":
        manifest = cmd_benchgen(
            args.targets,
            args.sentences,
            _require_out(args),
            checkpoint=args.checkpoint,
            endpoint=args.endpoint,
            mock=args.mock,
            per_token=args.per_token,
            vocab_size=args.vocab_size,
            n_per_pair=args.n_per_pair,
            cache_in=args.cache_in,
            cache_out=args.cache_out,
            timeout=args.timeout,
        )
        print(f"benchgen: {manifest.extra['n_pairs']} pairs")
    elif args.command == "analyze":
        manifest = cmd_analyze(
            args.model_pairs,
            args.human_pairs,
            _require_out(args),
            word_features=args.word_features,
            feature=args.feature,
        )
        print(f"analyze: {manifest.extra['n_pairs']} pairs compared")
    else:  # synth
        if args.seed is None:
            raise ContractError("synth requires --seed")
        manifest = cmd_synth(
            _require_out(args),
            seed=args.seed,
            n_pairs=args.n_pairs,
            vocab_size=args.vocab_size,
            feature_dim=args.feature_dim,
            noise=args.noise,
            value_corr=args.value_corr,
            restate_prob=args.restate_prob,
        )
        print(
            f"synth: {manifest.extra['n_records']} captions, "
            f"{manifest.extra['n_caption_tokens']} tokens"
        )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _dispatch(args)
    except ContractError as exc:
        print(f"groundlab: error: {exc}", file=sys.stderr)
        return 2
    except GroundlabError as exc:
        print(f"groundlab: error: {exc}", file=sys.stderr)
        return 1
    return 0
