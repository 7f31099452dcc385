"""Model tests: shapes, causality, fusion styles, loss anchors, gradients,
extraction, scoring, and checkpoint round-trips."""

import math

import numpy as np
import pytest

from groundlab import models, numcore as nc
from groundlab.corpus import (
    BOS_ID,
    CaptionRecord,
    Vocab,
    build_vocab,
    make_examples,
    synth_world,
)
from groundlab.errors import CapabilityError, ContractError, IngestionError
from groundlab.models import (
    FusionConfig,
    TransformerConfig,
    extract_word_reps,
    forward_lm,
    init_model,
    loss_clip,
    loss_next_token,
    perceiver_resample,
    sequence_logprob,
)

TINY = dict(n_layers=2, hidden_dim=16, n_heads=2, ff_dim=32, max_seq_len=16)


def tiny_world(seed=0, n_pairs=24):
    world = synth_world(seed, n_pairs=n_pairs, vocab_size=20, feature_dim=8)
    vocab = build_vocab(world.records)
    return world, vocab


def tiny_model(vocab, style="none", seed=0, regime="full_caption", **fkw):
    tcfg = TransformerConfig(vocab_size=vocab.size, **TINY)
    fcfg = FusionConfig(style=style, feature_dim=8 if style != "none" else 0, **fkw)
    return init_model(tcfg, fcfg, vocab, seed=seed, regime=regime)


def jitter(state, seed=0, scale=0.05):
    rng = np.random.default_rng(seed)
    for p in state.params.values():
        p.data = p.data + rng.normal(scale=scale, size=p.data.shape)


def directional_grad_check(state, loss_fn, seed=0, h=1e-5, rtol=1e-4):
    """Directional finite-difference check, one random direction per tensor."""
    rng = np.random.default_rng(seed)
    loss = loss_fn()
    grads = nc.backward(loss)
    for name, p in sorted(state.params.items()):
        g = grads.get(id(p))
        assert g is not None, f"no gradient for {name}"
        d = rng.normal(size=p.data.shape)
        d /= np.linalg.norm(d.reshape(-1)) or 1.0
        analytic = float((g * d).sum())
        orig = p.data.copy()
        p.data = orig + h * d
        hi = loss_fn().data.item()
        p.data = orig - h * d
        lo = loss_fn().data.item()
        p.data = orig
        numeric = (hi - lo) / (2 * h)
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-4)
        assert err < rtol, f"{name}: analytic={analytic} numeric={numeric} err={err}"


class TestForwardShapes:
    def test_single_token_shapes(self):
        _, vocab = tiny_world()
        state = tiny_model(vocab)
        logits, hiddens = forward_lm(state, np.array([BOS_ID]))
        assert logits.shape == (1, vocab.size)
        assert len(hiddens) == TINY["n_layers"] + 1
        assert all(h.shape == (1, TINY["hidden_dim"]) for h in hiddens)

    def test_git_prefix_excluded_from_outputs(self):
        _, vocab = tiny_world()
        state = tiny_model(vocab, style="git_prefix")
        fv = np.ones(8)
        logits, hiddens = forward_lm(state, np.array([BOS_ID, 5]), fvec=fv)
        assert logits.shape == (2, vocab.size)
        assert all(h.shape == (2, TINY["hidden_dim"]) for h in hiddens)

    def test_too_long_sequence(self):
        _, vocab = tiny_world()
        state = tiny_model(vocab)
        with pytest.raises(ContractError, match="max_seq_len"):
            forward_lm(state, np.zeros(17, dtype=np.int64))

    def test_missing_fvec_for_fused(self):
        _, vocab = tiny_world()
        for style in ("git_prefix", "flamingo_xattn"):
            state = tiny_model(vocab, style=style)
            with pytest.raises(ContractError, match="fvec"):
                forward_lm(state, np.array([BOS_ID, 4]))

    def test_clip_style_needs_no_fvec_in_forward(self):
        _, vocab = tiny_world()
        state = tiny_model(vocab, style="clip_contrastive")
        logits, _ = forward_lm(state, np.array([BOS_ID, 4]))
        assert logits.shape == (2, vocab.size)


class TestCausality:
    @pytest.mark.parametrize("style", ["none", "git_prefix", "flamingo_xattn"])
    def test_future_permutation_invariance(self, style):
        _, vocab = tiny_world()
        state = tiny_model(vocab, style=style)
        jitter(state, seed=3)
        rng = np.random.default_rng(0)
        tokens = rng.integers(4, vocab.size, size=10)
        fv = rng.normal(size=8) if style != "none" else None
        base, _ = forward_lm(state, tokens, fvec=fv)
        for cut in (3, 6, 9):
            mutated = tokens.copy()
            mutated[cut:] = rng.permutation(mutated[cut:])
            mutated[cut] = (mutated[cut] % (vocab.size - 4)) + 4  # also change
            out, _ = forward_lm(state, mutated, fvec=fv)
            np.testing.assert_array_equal(out.data[:cut], base.data[:cut])


class TestTiedEmbeddings:
    def test_no_separate_head_and_grad_reaches_embedding(self):
        _, vocab = tiny_world()
        state = tiny_model(vocab)
        assert "head.w" not in state.params
        logits, _ = forward_lm(state, np.array([BOS_ID, 4, 5]))
        nc.backward(nc.tsum(logits))
        assert state.params["emb.tok"].grad is not None

    def test_logits_track_embedding_storage(self):
        # mutating the embedding matrix in place changes the output
        # projection identically: they are the same storage
        _, vocab = tiny_world()
        state = tiny_model(vocab)
        tokens = np.array([BOS_ID, 4])
        before, _ = forward_lm(state, tokens)
        state.params["emb.tok"].data[7, :] += 10.0
        after, _ = forward_lm(state, tokens)
        assert after.data[0, 7] != before.data[0, 7]

    def test_untied_head(self):
        _, vocab = tiny_world()
        tcfg = TransformerConfig(vocab_size=vocab.size, tie_embeddings=False, **TINY)
        state = init_model(tcfg, FusionConfig(), vocab, seed=0)
        assert "head.w" in state.params
        logits, _ = forward_lm(state, np.array([BOS_ID, 4]))
        assert logits.shape == (2, vocab.size)


class TestNextTokenLoss:
    def test_uniform_logits_ln_vocab(self):
        world, vocab = tiny_world()
        state = tiny_model(vocab)
        state.params["emb.tok"].data[:] = 0.0  # zero embeddings => logits 0
        ex = make_examples(world.records[:4], vocab, "full_caption")
        loss = loss_next_token(state, ex)
        assert loss.data.item() == pytest.approx(math.log(vocab.size), abs=1e-9)

    def test_hand_computed_cross_entropy(self):
        z = np.array([[2.0, -1.0], [0.5, 0.5], [-3.0, 3.0]])
        t = np.array([0, 1, 1])
        want = float(
            -np.log(np.exp(z[np.arange(3), t]) / np.exp(z).sum(axis=1)).mean()
        )
        got = nc.cross_entropy(nc.Tensor(z), t).data.item()
        assert got == pytest.approx(want, abs=1e-9)

    def test_padding_masked(self):
        world, vocab = tiny_world()
        state = tiny_model(vocab)
        jitter(state, seed=1)
        ex = make_examples(world.records[:6], vocab, "full_caption")
        # the same examples, one at a time (no padding), token-weighted
        total, weight = 0.0, 0
        for e in ex:
            single = loss_next_token(state, [e]).data.item()
            n = len(e.tokens) - 1
            total += single * n
            weight += n
        batched = loss_next_token(state, ex).data.item()
        assert batched == pytest.approx(total / weight, rel=1e-10)


class TestClipLoss:
    def make_clip(self, n=4, seed=0):
        world, vocab = tiny_world(seed=seed)
        state = tiny_model(vocab, style="clip_contrastive", seed=seed,
                           regime="single_word")
        ex = make_examples(world.records, vocab, "single_word",
                           features=world.features)[:n]
        return state, ex

    def test_single_pair_zero_loss(self):
        state, ex = self.make_clip(n=1)
        assert loss_clip(state, ex).data.item() == pytest.approx(0.0, abs=1e-12)

    def test_identical_embeddings_ln_n(self):
        for n in (1, 2, 8):
            state, ex = self.make_clip(n=n)
            same = np.ones(8)
            ex = [type(e)(tokens=ex[0].tokens, fvec=same, regime=e.regime) for e in ex]
            loss = loss_clip(state, ex)
            assert loss.data.item() == pytest.approx(math.log(n), abs=1e-6)

    def test_hand_similarity_matrix(self):
        sim = nc.Tensor(np.array([[1.0, 0.0], [0.0, 1.0]]))
        loss = models.clip_loss_from_similarity(sim, 1.0)
        assert loss.data.item() == pytest.approx(math.log(1 + math.exp(-1)), abs=1e-9)

    def test_permutation_equivariance(self):
        state, ex = self.make_clip(n=6)
        jitter(state, seed=2)
        rng = np.random.default_rng(0)
        perm = rng.permutation(6)
        a = loss_clip(state, ex).data.item()
        b = loss_clip(state, [ex[i] for i in perm]).data.item()
        assert a == pytest.approx(b, abs=1e-12)

    def test_zero_norm_image_named(self):
        state, ex = self.make_clip(n=3)
        ex[1] = type(ex[1])(tokens=ex[1].tokens, fvec=np.zeros(8), regime=ex[1].regime)
        with pytest.raises(Exception, match="record 1"):
            loss_clip(state, ex)

    def test_fixed_temperature_override(self):
        state, ex = self.make_clip(n=4)
        jitter(state, seed=5)
        a = loss_clip(state, ex, temperature=1.0).data.item()
        state.params["clip.logit_scale"].data = np.asarray(0.0)  # scale=1
        b = loss_clip(state, ex).data.item()
        assert a == pytest.approx(b, abs=1e-12)

    def test_logit_scale_clamp(self):
        state, _ = self.make_clip()
        state.params["clip.logit_scale"].data = np.asarray(9.9)
        models.clamp_logit_scale(state)
        assert state.params["clip.logit_scale"].data == pytest.approx(math.log(100.0))


class TestPerceiverResampler:
    def make_flamingo(self, **fkw):
        _, vocab = tiny_world()
        return tiny_model(vocab, style="flamingo_xattn", **fkw)

    def test_output_length_independent_of_input(self):
        state = self.make_flamingo()
        for t in (17, 1, 5):
            out = perceiver_resample(state, np.random.default_rng(t).normal(size=(t, 8)))
            assert out.shape == (64, 8)

    def test_configurable_latents(self):
        state = self.make_flamingo(n_latents=7)
        out = perceiver_resample(state, np.ones((3, 8)))
        assert out.shape == (7, 8)

    def test_empty_input_rejected(self):
        state = self.make_flamingo()
        with pytest.raises(ContractError, match="nonempty"):
            perceiver_resample(state, np.zeros((0, 8)))

    def test_sensitivity_to_every_input_token(self):
        for seed in range(10):
            state = self.make_flamingo(seed=seed)
            rng = np.random.default_rng(seed)
            x = rng.normal(size=(4, 8))
            base = perceiver_resample(state, x).data
            i = int(rng.integers(4))
            x2 = x.copy()
            x2[i] += 0.1
            out = perceiver_resample(state, x2).data
            assert np.abs(out - base).max() > 0

    def test_flamingo_gates_start_closed(self):
        # with zero gates the fused forward equals the text-only forward
        state = self.make_flamingo()
        tokens = np.array([BOS_ID, 5, 9, 4])
        fused, _ = forward_lm(state, tokens, fvec=np.ones(8))
        plain, _ = forward_lm(state, tokens, text_only=True)
        np.testing.assert_array_equal(fused.data, plain.data)

    def test_xattn_every_2_has_fewer_blocks(self):
        s1 = self.make_flamingo()
        s2 = self.make_flamingo(xattn_every=2)
        n1 = sum(1 for k in s1.params if k.startswith("xattn."))
        n2 = sum(1 for k in s2.params if k.startswith("xattn."))
        assert n2 < n1


def regime_loss_builders(seed):
    """(name, state, loss_fn) for all five training regimes, tiny config."""
    world, vocab = tiny_world(seed=seed)
    feats = world.features
    out = []

    def batch(regime, n, with_feats=True):
        ex = make_examples(
            world.records, vocab, regime, features=feats if with_feats else None
        )
        return ex[:n]

    lm = tiny_model(vocab, seed=seed)
    lm_ex = batch("full_caption", 4, with_feats=False)
    out.append(("language_only", lm, lambda s=lm, e=lm_ex: loss_next_token(s, e)))

    git = tiny_model(vocab, style="git_prefix", seed=seed, regime="single_word")
    git_ex = batch("single_word", 6)
    out.append(("git", git, lambda s=git, e=git_ex: loss_next_token(s, e)))

    clip = tiny_model(vocab, style="clip_contrastive", seed=seed, regime="single_word")
    clip_ex = batch("single_word", 6)
    out.append(("clip", clip, lambda s=clip, e=clip_ex: loss_clip(s, e)))

    flam = tiny_model(vocab, style="flamingo_xattn", seed=seed, regime="full_caption")
    flam_ex = batch("full_caption", 4)
    out.append(("flamingo", flam, lambda s=flam, e=flam_ex: loss_next_token(s, e)))

    wo = tiny_model(vocab, seed=seed, regime="word_only")
    wo_ex = batch("word_only", 6, with_feats=False)
    out.append(("word_only", wo, lambda s=wo, e=wo_ex: loss_next_token(s, e)))
    return out


class TestRegimeGradients:
    @pytest.mark.parametrize("seed", [0, 1])
    def test_all_regimes_pass_fd(self, seed):
        for name, state, loss_fn in regime_loss_builders(seed):
            jitter(state, seed=seed + 99)
            directional_grad_check(state, loss_fn, seed=seed)


class TestOverfitSmoke:
    def test_losses_decrease_on_memorization_set(self):
        from groundlab.numcore import OptimizerState, adamw_step

        for name, state, loss_fn in regime_loss_builders(3):
            opt = OptimizerState(weight_decay=0.0)
            first = last = None
            for step in range(50):
                loss = loss_fn()
                grads = nc.backward(loss)
                named = {
                    k: grads[id(p)] for k, p in state.params.items() if id(p) in grads
                }
                adamw_step(state.params, named, opt, lr=3e-3)
                models.clamp_logit_scale(state)
                if first is None:
                    first = loss.data.item()
                last = loss.data.item()
            assert last < first, f"{name}: no overfitting progress"


class TestWordReps:
    def test_shape_and_determinism(self):
        _, vocab = tiny_world()
        state = tiny_model(vocab)
        jitter(state, seed=4)
        word = vocab.id_to_token[6]
        a, unk_a = extract_word_reps(state, word, vocab)
        b, _ = extract_word_reps(state, word, vocab)
        assert a.shape == (3, TINY["hidden_dim"])
        assert not unk_a
        np.testing.assert_array_equal(a, b)

    def test_unknown_word_flagged(self):
        _, vocab = tiny_world()
        state = tiny_model(vocab)
        _, unk = extract_word_reps(state, "zzzqqq", vocab)
        assert unk

    def test_multi_token_word_matches_forward(self):
        records = [CaptionRecord(id="r", caption="a well-lit room", fvec_index=0)]
        vocab = build_vocab(records)
        state = tiny_model(vocab, seed=1)
        jitter(state, seed=5)
        reps, unk = extract_word_reps(state, "well-lit", vocab)
        assert not unk
        ids = [BOS_ID] + vocab.encode("well-lit")
        _, hiddens = forward_lm(state, np.asarray(ids))
        for layer, h in enumerate(hiddens):
            np.testing.assert_array_equal(reps[layer], h.data[-1])

    def test_batched_matches_single(self):
        world, vocab = tiny_world()
        state = tiny_model(vocab)
        jitter(state, seed=6)
        words = world.words[:8]
        mat, kept, dropped = models.extract_words_matrix(state, words, vocab)
        assert kept == words and not dropped
        for i, w in enumerate(words):
            single, _ = extract_word_reps(state, w, vocab)
            np.testing.assert_allclose(mat[:, i, :], single, atol=1e-12)

    def test_oov_words_dropped_in_batch(self):
        world, vocab = tiny_world()
        state = tiny_model(vocab)
        mat, kept, dropped = models.extract_words_matrix(
            state, [world.words[0], "zzzqqq"], vocab
        )
        assert kept == [world.words[0]]
        assert dropped == ["zzzqqq"]
        assert mat.shape[1] == 1


class TestSequenceLogprob:
    def test_uniform_model_value(self):
        _, vocab = tiny_world()
        state = tiny_model(vocab)
        state.params["emb.tok"].data[:] = 0.0
        tokens = np.array([BOS_ID, 4, 5, 6])
        lp = sequence_logprob(state, tokens)
        assert lp == pytest.approx(-3 * math.log(vocab.size), abs=1e-9)

    def test_nonpositive(self):
        _, vocab = tiny_world()
        state = tiny_model(vocab)
        jitter(state, seed=7)
        rng = np.random.default_rng(0)
        for _ in range(5):
            tokens = rng.integers(4, vocab.size, size=6)
            assert sequence_logprob(state, tokens) <= 0.0

    def test_stepwise_recomputation(self):
        _, vocab = tiny_world()
        state = tiny_model(vocab)
        jitter(state, seed=8)
        tokens = np.array([BOS_ID, 4, 9, 5, 7])
        total = sequence_logprob(state, tokens)
        stepwise = 0.0
        for i in range(1, len(tokens)):
            logits, _ = forward_lm(state, tokens[:i])
            logp = nc.log_softmax(logits, axis=-1).data
            stepwise += logp[-1, tokens[i]]
        assert total == pytest.approx(stepwise, abs=1e-10)

    def test_clip_capability_error(self):
        _, vocab = tiny_world()
        state = tiny_model(vocab, style="clip_contrastive")
        with pytest.raises(CapabilityError, match="proxy"):
            sequence_logprob(state, np.array([BOS_ID, 4]))


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        _, vocab = tiny_world()
        state = tiny_model(vocab, style="flamingo_xattn", regime="full_caption")
        jitter(state, seed=9)
        # float32-valued parameters so storage is lossless for the test
        for p in state.params.values():
            p.data = p.data.astype(np.float32).astype(np.float64)
        state.step = 123
        path = tmp_path / "model.ckpt"
        models.save_checkpoint(state, path)
        loaded = models.load_checkpoint(path)
        assert loaded.tcfg == state.tcfg
        assert loaded.fcfg == state.fcfg
        assert loaded.step == 123
        assert loaded.regime == "full_caption"
        assert loaded.vocab.id_to_token == vocab.id_to_token
        assert sorted(loaded.params) == sorted(state.params)
        for k, p in state.params.items():
            np.testing.assert_array_equal(loaded.params[k].data, p.data)

    def test_bad_magic_names_tag(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"NOTACKPT" + b"\x00" * 32)
        with pytest.raises(IngestionError, match="LGCKPT1"):
            models.load_checkpoint(path)

    def test_deterministic_bytes(self, tmp_path):
        _, vocab = tiny_world()
        a = tiny_model(vocab, style="clip_contrastive", seed=5)
        b = tiny_model(vocab, style="clip_contrastive", seed=5)
        pa, pb = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        models.save_checkpoint(a, pa)
        models.save_checkpoint(b, pb)
        assert pa.read_bytes() == pb.read_bytes()
