"""Pilot for the data-scale trend experiment: CLIP vs LM relatedness by budget.

Usage: python3 scripts/pilot_trend.py SEEDS BUDGETS [options]
  e.g. python3 scripts/pilot_trend.py 0,1 50000,500000 --noise 1.0 --vocab 96
"""

import argparse
import sys
import time
import warnings

warnings.filterwarnings("ignore")

import numpy as np

from groundlab.benchmarks import eval_relatedness
from groundlab.benchmarks.datasets import RelatednessSet
from groundlab.corpus import build_vocab, make_examples, synth_world, tokenize
from groundlab.models import (
    FusionConfig,
    RepTable,
    TransformerConfig,
    clamp_logit_scale,
    init_model,
    loss_clip,
    loss_next_token,
)
from groundlab.numcore import OptimizerState, adamw_step, backward, lr_at, named_grads
from groundlab.seeding import derive_seed, substream


def truncate(world, budget):
    used, keep = 0, 0
    for rec in world.records:
        n = len(tokenize(rec.caption))
        if used + n > budget:
            break
        used += n
        keep += 1
    return world.records[:keep], used


def train(records, features, vocab, *, variant, seed, epochs, n_layers, dim,
          batch, lr, warmup):
    tcfg = TransformerConfig(
        vocab_size=vocab.size, n_layers=n_layers, hidden_dim=dim,
        n_heads=2, ff_dim=dim * 2, max_seq_len=16,
    )
    if variant == "clip":
        fcfg = FusionConfig(style="clip_contrastive", feature_dim=features.shape[1])
        regime, loss_fn, feats = "single_word", loss_clip, features
    else:
        fcfg = FusionConfig()
        regime, loss_fn, feats = "full_caption", loss_next_token, None
    state = init_model(tcfg, fcfg, vocab, seed=derive_seed(seed, f"init:{variant}"),
                       regime=regime)
    examples = make_examples(records, vocab, regime, features=feats)
    opt = OptimizerState()
    rng = substream(seed, f"train:{variant}")
    for _ in range(epochs):
        order = rng.permutation(len(examples))
        for start in range(0, len(order), batch):
            group = [examples[i] for i in order[start : start + batch]]
            loss = loss_fn(state, group)
            adamw_step(
                state.params, named_grads(state.params, backward(loss)), opt,
                lr=lr_at(opt.step + 1, warmup, lr),
            )
            if variant == "clip":
                clamp_logit_scale(state)
    return state


def relatedness(state, world, vocab):
    rset = RelatednessSet(
        pairs=[(w1, w2) for w1, w2, _, _ in world.sims],
        scores=np.array([s for _, _, s, _ in world.sims]),
        categories=[c for _, _, _, c in world.sims],
    )
    reps = RepTable.from_model(state, world.words, vocab)
    return eval_relatedness(reps, rset).final_score


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("seeds")
    ap.add_argument("budgets")
    ap.add_argument("--vocab", type=int, default=96)
    ap.add_argument("--feature-dim", type=int, default=32)
    ap.add_argument("--noise", type=float, default=1.0)
    ap.add_argument("--value-corr", type=float, default=0.5)
    ap.add_argument("--restate", type=float, default=0.5)
    ap.add_argument("--layers", type=int, default=1)
    ap.add_argument("--dim", type=int, default=32)
    ap.add_argument("--lm-batch", type=int, default=64)
    ap.add_argument("--clip-batch", type=int, default=256)
    ap.add_argument("--lr", type=float, default=1e-3)
    ap.add_argument("--warmup", type=int, default=100)
    ap.add_argument("--small-epochs", type=int, default=4)
    ap.add_argument("--large-epochs", type=int, default=1)
    ap.add_argument("--large-cut", type=int, default=200_000,
                    help="budgets >= this use large-epochs")
    args = ap.parse_args()

    seeds = [int(s) for s in args.seeds.split(",")]
    budgets = [int(b) for b in args.budgets.split(",")]
    max_budget = max(budgets)
    n_pairs = int(max_budget / 8.2) + 200

    print(f"# vocab={args.vocab} noise={args.noise} vc={args.value_corr} "
          f"rp={args.restate} layers={args.layers} dim={args.dim} lr={args.lr}")
    results = {}
    for seed in seeds:
        t0 = time.perf_counter()
        world = synth_world(seed, n_pairs, vocab_size=args.vocab,
                            feature_dim=args.feature_dim,
                            noise=args.noise, value_corr=args.value_corr,
                            restate_prob=args.restate)
        for budget in budgets:
            records, used = truncate(world, budget)
            vocab = build_vocab(records)
            epochs = args.small_epochs if budget < args.large_cut else args.large_epochs
            for variant in ("lm", "clip"):
                t1 = time.perf_counter()
                state = train(
                    records, world.features, vocab, variant=variant, seed=seed,
                    epochs=epochs, n_layers=args.layers, dim=args.dim,
                    batch=args.lm_batch if variant == "lm" else args.clip_batch,
                    lr=args.lr, warmup=args.warmup,
                )
                rho = relatedness(state, world, vocab)
                results.setdefault((budget, variant), []).append(rho)
                print(f"seed={seed} budget={budget} {variant}: rho={rho:+.4f} "
                      f"({time.perf_counter()-t1:.1f}s, {epochs} ep, {used} tok)",
                      flush=True)
        print(f"# seed {seed} total {time.perf_counter()-t0:.1f}s", flush=True)

    print("\n# summary")
    for budget in budgets:
        lm = np.array(results[(budget, "lm")])
        clip = np.array(results[(budget, "clip")])
        diff = clip - lm
        print(f"budget={budget}: LM={lm.mean():+.4f} CLIP={clip.mean():+.4f} "
              f"gap(CLIP-LM)={diff.mean():+.4f} (per-seed {np.round(diff, 3)})")


if __name__ == "__main__":
    main()
