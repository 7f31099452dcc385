"""Command bodies: train, eval, sweep, benchgen, analyze, synth.

Each command writes its artifacts plus a manifest.json carrying the exact
resolved configuration and a fingerprint, so any output directory can be
regenerated from its manifest alone.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from ..analysis import human_likeness, load_word_features, regress_likeness, write_pair_csv
from ..benchgen import (
    InProcessScorer,
    MockScorer,
    ScorerClient,
    build_benchmark,
    build_candidate_vocab,
    load_target_sentences,
    load_targets,
)
from ..benchmarks import (
    EvalReport,
    eval_brain_response,
    eval_context_understanding,
    eval_lexical_relation,
    eval_pos,
    eval_relatedness,
    eval_semantic_features,
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
from ..benchmarks.relatedness import cosine_pair_sims
from ..corpus import load_corpus, mean_word_features, synth_world, tokenize, write_world
from ..errors import ContractError, GroundlabError
from ..models import RepTable, extract_sequence_reps, load_checkpoint
from .config import EPOCH_TABLE, RunConfig, load_run_config, write_run_config
from .manifest import Manifest, new_manifest
from .train import run_training

BENCHMARKS = (
    "relatedness",
    "lexical_relation",
    "semantic_features",
    "pos",
    "context_understanding",
    "brain_response",
)

# Named model variants: (regime, fusion). Raw "regime:fusion" is also accepted.
VARIANTS = {
    "language_only": ("full_caption", "none"),
    "git": ("full_caption", "git_prefix"),
    "flamingo": ("full_caption", "flamingo_xattn"),
    "clip": ("single_word", "clip_contrastive"),
    "word_only": ("word_only", "none"),
}


def parse_variant(name: str) -> tuple[str, str, str]:
    """Resolve a variant name to (label, regime, fusion)."""
    if name in VARIANTS:
        regime, fusion = VARIANTS[name]
        return name, regime, fusion
    if ":" in name:
        regime, fusion = name.split(":", 1)
        return name, regime, fusion
    raise ContractError(
        f"unknown variant '{name}'; use one of {sorted(VARIANTS)} or 'regime:fusion'"
    )


def _args_fingerprint(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _finish(manifest: Manifest, outdir: Path, started: float) -> Manifest:
    manifest.elapsed_seconds = round(time.perf_counter() - started, 3)
    manifest.save(outdir / "manifest.json")
    return manifest


# --------------------------------------------------------------------- train


def cmd_train(config=None, overrides: dict | None = None) -> Manifest:
    started = time.perf_counter()
    cfg = load_run_config(config, overrides)
    outcome = run_training(cfg)
    outdir = Path(cfg.out)
    write_run_config(cfg, outdir / "config_resolved.ini")
    epochs, source = cfg.resolved_epochs()
    manifest = new_manifest("train", cfg.fingerprint(), cfg.to_dict())
    manifest.artifacts = {
        "checkpoint": "checkpoint.bin",
        "loss_log": "loss_log.csv",
        "config": "config_resolved.ini",
    }
    manifest.extra = {
        "epochs": epochs,
        "epoch_source": source,
        "epoch_table": {str(k): v for k, v in EPOCH_TABLE.items()},
        "final_train_loss": outcome.history[-1][1] if outcome.history else None,
        "final_eval_loss": outcome.history[-1][2] if outcome.history else None,
        "steps": outcome.state.step,
    }
    return _finish(manifest, outdir, started)


# ---------------------------------------------------------------------- eval


def _require(value, flag: str, benchmark: str):
    if value is None:
        raise ContractError(f"benchmark '{benchmark}' requires --{flag}")
    return value


def _reps_for_words(state, words: list[str]) -> RepTable:
    reps = RepTable.from_model(state, sorted(set(words)), state.vocab)
    if not reps.words:
        raise ContractError("no dataset word is representable under this checkpoint")
    return reps


def _write_pair_sims(path, reps: RepTable, rset, layer: int) -> int:
    """Selected-layer cosine per covered pair; returns the number written."""
    rows = []
    for i, (w1, w2) in enumerate(rset.pairs):
        if w1 in reps and w2 in reps:
            rows.append((i, w1, w2))
    idx1 = reps.rows([w1 for _, w1, _ in rows])
    idx2 = reps.rows([w2 for _, _, w2 in rows])
    sims = cosine_pair_sims(reps.layer(layer), idx1, idx2)
    with open(path, "w", encoding="utf-8") as fh:
        for (i, w1, w2), sim in zip(rows, sims):
            if rset.categories is not None:
                fh.write(f"{w1}\t{w2}\t{sim:.17g}\t{rset.categories[i]}\n")
            else:
                fh.write(f"{w1}\t{w2}\t{sim:.17g}\n")
    return len(rows)


def cmd_eval(
    checkpoint,
    benchmark: str,
    out,
    *,
    seed: int = 0,
    splits: int | None = None,
    pairs=None,
    aoa=None,
    max_age: float = 10.0,
    category: str | None = None,
    relations=None,
    norms=None,
    tags=None,
    sentence_pairs=None,
    segment_width: int = 3,
    captions=None,
    features=None,
    sentences=None,
    responses=None,
    ceilings=None,
) -> tuple[Manifest, EvalReport]:
    started = time.perf_counter()
    if benchmark not in BENCHMARKS:
        raise ContractError(
            f"unknown benchmark '{benchmark}', expected one of {BENCHMARKS}"
        )
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    state = load_checkpoint(checkpoint)
    artifacts = {"report": "report.json"}

    if benchmark == "relatedness":
        rset = load_relatedness(_require(pairs, "pairs", benchmark))
        aoa_map = load_aoa(aoa) if aoa is not None else None
        words = sorted({w for pair in rset.pairs for w in pair})
        reps = _reps_for_words(state, words)
        report = eval_relatedness(
            reps, rset, aoa=aoa_map, max_age=max_age, category=category
        )
        scored = rset if aoa_map is None else filter_relatedness_by_aoa(
            rset, aoa_map, max_age=max_age
        )
        _write_pair_sims(
            outdir / "pair_sims.tsv", reps, scored, report.selected_layer
        )
        artifacts["pair_sims"] = "pair_sims.tsv"
    elif benchmark == "lexical_relation":
        relset = load_relations(_require(relations, "relations", benchmark))
        words = {w for p in relset.train_pairs for w in p}
        words |= {w for p in relset.test_pairs for w in p}
        report = eval_lexical_relation(
            _reps_for_words(state, sorted(words)), relset, seed=seed
        )
    elif benchmark == "semantic_features":
        fnset = load_feature_norms(_require(norms, "norms", benchmark))
        kwargs = {} if splits is None else {"splits": splits}
        report = eval_semantic_features(
            _reps_for_words(state, fnset.words), fnset, seed=seed, **kwargs
        )
    elif benchmark == "pos":
        tag_map = load_pos_tags(_require(tags, "tags", benchmark))
        kwargs = {} if splits is None else {"splits": splits}
        report = eval_pos(
            _reps_for_words(state, sorted(tag_map)), tag_map, seed=seed, **kwargs
        )
    elif benchmark == "context_understanding":
        spset = load_sentence_pairs(
            _require(sentence_pairs, "sentence-pairs", benchmark)
        )
        word_features = None
        if captions is not None or features is not None:
            if captions is None or features is None:
                raise ContractError(
                    "the matching proxy needs both --captions and --features"
                )
            records, feats = load_corpus(captions, features)
            word_features = mean_word_features(records, feats, state.vocab)
        report = eval_context_understanding(
            state, spset, word_features=word_features, segment_width=segment_width
        )
    else:  # brain_response
        rset = load_responses(
            _require(sentences, "sentences", benchmark),
            _require(responses, "responses", benchmark),
            _require(ceilings, "ceilings", benchmark),
        )
        reps = extract_sequence_reps(state, rset.sentences, state.vocab)
        kwargs = {} if splits is None else {"splits": splits}
        report = eval_brain_response(reps, rset, seed=seed, **kwargs)

    report.save(outdir / "report.json")
    payload = {
        "command": "eval",
        "benchmark": benchmark,
        "checkpoint": checkpoint,
        "seed": seed,
        "splits": splits,
        "pairs": pairs,
        "aoa": aoa,
        "max_age": max_age,
        "category": category,
        "relations": relations,
        "norms": norms,
        "tags": tags,
        "sentence_pairs": sentence_pairs,
        "segment_width": segment_width,
        "captions": captions,
        "features": features,
        "sentences": sentences,
        "responses": responses,
        "ceilings": ceilings,
    }
    payload = {
        k: str(v) if isinstance(v, Path) else v for k, v in payload.items()
    }
    manifest = new_manifest("eval", _args_fingerprint(payload), payload)
    manifest.artifacts = artifacts
    manifest.extra = {
        "final_score": report.final_score,
        "selected_layer": report.selected_layer,
    }
    return _finish(manifest, outdir, started), report


# --------------------------------------------------------------------- sweep


def _sweep_cell(cfg: RunConfig, datasets: dict) -> list[dict]:
    """Train one grid cell and score every requested benchmark."""
    outcome = run_training(cfg)
    state = outcome.state
    rows = []
    for name, data in datasets.items():
        row = {"benchmark": name, "score": None, "selected_layer": None, "error": ""}
        try:
            if name == "relatedness":
                words = sorted({w for pair in data.pairs for w in pair})
                report = eval_relatedness(_reps_for_words(state, words), data)
            elif name == "lexical_relation":
                words = {w for p in data.train_pairs for w in p}
                words |= {w for p in data.test_pairs for w in p}
                report = eval_lexical_relation(
                    _reps_for_words(state, sorted(words)), data, seed=cfg.seed
                )
            elif name == "semantic_features":
                report = eval_semantic_features(
                    _reps_for_words(state, data.words), data, seed=cfg.seed
                )
            else:  # pos
                report = eval_pos(
                    _reps_for_words(state, sorted(data)), data, seed=cfg.seed
                )
            row["score"] = report.final_score
            row["selected_layer"] = report.selected_layer
        except (GroundlabError, ContractError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def cmd_sweep(
    config=None,
    overrides: dict | None = None,
    *,
    variants: list[str],
    scales: list[int],
    seeds: list[int],
    out,
    threads: int = 1,
    pairs=None,
    relations=None,
    norms=None,
    tags=None,
) -> Manifest:
    started = time.perf_counter()
    if not variants or not scales or not seeds:
        raise ContractError("sweep needs at least one variant, one scale, one seed")
    datasets: dict = {}
    if pairs is not None:
        datasets["relatedness"] = load_relatedness(pairs)
    if relations is not None:
        datasets["lexical_relation"] = load_relations(relations)
    if norms is not None:
        datasets["semantic_features"] = load_feature_norms(norms)
    if tags is not None:
        datasets["pos"] = load_pos_tags(tags)
    if not datasets:
        raise ContractError(
            "sweep needs at least one benchmark dataset "
            "(--pairs, --relations, --norms, or --tags)"
        )

    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    resolved = [parse_variant(v) for v in variants]

    cells = []
    for label, regime, fusion in resolved:
        for scale in scales:
            for seed in seeds:
                cell_overrides = dict(overrides or {})
                cell_overrides.update(
                    regime=regime,
                    fusion=fusion,
                    token_budget=scale,
                    seed=seed,
                    out=str(outdir / "cells" / f"{label}_{scale}_{seed}"),
                )
                cfg = load_run_config(config, cell_overrides)
                cells.append((label, scale, seed, cfg))

    def run_cell(cell):
        label, scale, seed, cfg = cell
        try:
            return [
                {"variant": label, "regime": cfg.regime, "fusion": cfg.fusion,
                 "scale": scale, "seed": seed, **row}
                for row in _sweep_cell(cfg, datasets)
            ]
        except (GroundlabError, ContractError) as exc:
            return [
                {"variant": label, "regime": cfg.regime, "fusion": cfg.fusion,
                 "scale": scale, "seed": seed, "benchmark": name, "score": None,
                 "selected_layer": None, "error": f"{type(exc).__name__}: {exc}"}
                for name in datasets
            ]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cell_rows = list(pool.map(run_cell, cells))
    else:
        cell_rows = [run_cell(cell) for cell in cells]
    rows = [row for group in cell_rows for row in group]

    long_path = outdir / "sweep_long.csv"
    with open(long_path, "w", encoding="utf-8") as fh:
        fh.write("variant,regime,fusion,scale,seed,benchmark,score,selected_layer,error\n")
        for r in rows:
            score = "" if r["score"] is None else f"{r['score']:.17g}"
            layer = "" if r["selected_layer"] is None else str(r["selected_layer"])
            error = r["error"].replace(",", ";").replace("\n", " ")
            fh.write(
                f"{r['variant']},{r['regime']},{r['fusion']},{r['scale']},"
                f"{r['seed']},{r['benchmark']},{score},{layer},{error}\n"
            )

    summary_path = outdir / "sweep_summary.csv"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write("variant,scale,benchmark,n,mean,stderr\n")
        for label, _, _ in resolved:
            for scale in scales:
                for name in datasets:
                    scores = [
                        r["score"]
                        for r in rows
                        if r["variant"] == label
                        and r["scale"] == scale
                        and r["benchmark"] == name
                        and r["score"] is not None
                    ]
                    if not scores:
                        fh.write(f"{label},{scale},{name},0,,\n")
                        continue
                    mean = float(np.mean(scores))
                    if len(scores) > 1:
                        stderr = float(np.std(scores, ddof=1) / np.sqrt(len(scores)))
                    else:
                        stderr = 0.0
                    fh.write(
                        f"{label},{scale},{name},{len(scores)},"
                        f"{mean:.17g},{stderr:.17g}\n"
                    )

    payload = {
        "command": "sweep",
        "config": str(config) if config else None,
        "overrides": overrides or {},
        "variants": list(variants),
        "scales": list(scales),
        "seeds": list(seeds),
        "benchmarks": sorted(datasets),
    }
    manifest = new_manifest("sweep", _args_fingerprint(payload), payload)
    manifest.artifacts = {"long": "sweep_long.csv", "summary": "sweep_summary.csv"}
    manifest.extra = {
        "n_cells": len(cells),
        "n_rows": len(rows),
        "n_failures": sum(1 for r in rows if r["error"]),
    }
    return _finish(manifest, outdir, started)


# ------------------------------------------------------------------ benchgen


def cmd_benchgen(
    targets,
    sentences,
    out,
    *,
    checkpoint=None,
    endpoint=None,
    mock: bool = False,
    per_token: bool = False,
    vocab_size: int = 200,
    n_per_pair: int = 20,
    cache_in=None,
    cache_out=None,
    timeout: float = 30.0,
) -> Manifest:
    started = time.perf_counter()
    sources = sum(1 for s in (checkpoint, endpoint) if s is not None) + int(mock)
    if sources != 1:
        raise ContractError(
            "pick exactly one scorer: --checkpoint, --endpoint, or --mock"
        )
    if endpoint is not None:
        scorer = ScorerClient(endpoint, timeout=timeout)
    elif checkpoint is not None:
        scorer = InProcessScorer(load_checkpoint(checkpoint), per_token=per_token)
    else:
        scorer = MockScorer()
    if cache_in is not None:
        scorer.load_cache(cache_in)

    target_specs = load_targets(targets)
    pools = load_target_sentences(sentences)
    all_sentences = [s for pool in pools.values() for s in pool]
    candidate_vocab = build_candidate_vocab(
        [SimpleNamespace(caption=s) for s in all_sentences], vocab_size
    )

    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    build = build_benchmark(
        scorer, target_specs, pools, candidate_vocab, n_per_pair=n_per_pair
    )
    write_sentence_pairs(build.pairs.pairs, outdir / "pairs.tsv")
    with open(outdir / "build_log.json", "w", encoding="utf-8") as fh:
        json.dump(
            {"log": build.log, "candidates": [asdict(c) for c in build.candidates]},
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    if cache_out is not None:
        scorer.save_cache(cache_out)

    payload = {
        "command": "benchgen",
        "targets": str(targets),
        "sentences": str(sentences),
        "checkpoint": str(checkpoint) if checkpoint else None,
        "endpoint": endpoint,
        "mock": mock,
        "per_token": per_token,
        "vocab_size": vocab_size,
        "n_per_pair": n_per_pair,
    }
    manifest = new_manifest("benchgen", _args_fingerprint(payload), payload)
    manifest.artifacts = {"pairs": "pairs.tsv", "build_log": "build_log.json"}
    manifest.extra = {
        "n_pairs": len(build.pairs),
        "n_service_calls": scorer.n_service_calls,
        "candidate_vocab_size": len(candidate_vocab),
    }
    return _finish(manifest, outdir, started)


# ------------------------------------------------------------------- analyze


def cmd_analyze(
    model_pairs,
    human_pairs,
    out,
    *,
    word_features=None,
    feature: str | None = None,
) -> Manifest:
    started = time.perf_counter()
    if (word_features is None) != (feature is None):
        raise ContractError("--word-features and --feature go together")
    mset = load_relatedness(model_pairs)
    hset = load_relatedness(human_pairs)
    likeness = human_likeness(
        dict(zip(mset.pairs, mset.scores)), dict(zip(hset.pairs, hset.scores))
    )
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_pair_csv(likeness, outdir / "likeness.csv")
    artifacts = {"likeness": "likeness.csv"}
    extra: dict = {"n_pairs": len(likeness)}

    if feature is not None:
        table = load_word_features(word_features)
        result = regress_likeness(likeness, table, feature)
        with open(outdir / "regression.json", "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "feature": feature,
                    "slope": result.slope,
                    "intercept": result.intercept,
                    "r_squared": result.r_squared,
                    "slope_stderr": result.slope_stderr,
                    "residual_std": result.residual_std,
                    "n": result.n,
                },
                fh,
                indent=2,
                sort_keys=True,
            )
            fh.write("\n")
        artifacts["regression"] = "regression.json"
        extra["r_squared"] = result.r_squared

    payload = {
        "command": "analyze",
        "model_pairs": str(model_pairs),
        "human_pairs": str(human_pairs),
        "word_features": str(word_features) if word_features else None,
        "feature": feature,
    }
    manifest = new_manifest("analyze", _args_fingerprint(payload), payload)
    manifest.artifacts = artifacts
    manifest.extra = extra
    return _finish(manifest, outdir, started)


# --------------------------------------------------------------------- synth


def cmd_synth(
    out,
    *,
    seed: int,
    n_pairs: int,
    vocab_size: int = 48,
    feature_dim: int = 32,
    noise: float = 1.0,
    value_corr: float = 0.5,
    restate_prob: float = 0.5,
) -> Manifest:
    started = time.perf_counter()
    world = synth_world(
        seed,
        n_pairs,
        vocab_size=vocab_size,
        feature_dim=feature_dim,
        noise=noise,
        value_corr=value_corr,
        restate_prob=restate_prob,
    )
    outdir = Path(out)
    paths = write_world(world, outdir)
    payload = {
        "command": "synth",
        "seed": seed,
        "n_pairs": n_pairs,
        "vocab_size": vocab_size,
        "feature_dim": feature_dim,
        "noise": noise,
        "value_corr": value_corr,
        "restate_prob": restate_prob,
    }
    manifest = new_manifest("synth", _args_fingerprint(payload), payload)
    manifest.artifacts = {name: Path(p).name for name, p in paths.items()}
    manifest.extra = {
        "n_records": len(world.records),
        "n_words": len(world.words),
        "n_caption_tokens": int(
            sum(len(tokenize(r.caption)) for r in world.records)
        ),
    }
    return _finish(manifest, outdir, started)
