"""Acceptance suite: one test per release criterion, each printing a
pass line (run with `pytest -s tests/test_acceptance.py` to see them).

Statistical criteria use fixed seeds; every tolerance is stated inline.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.stats

from nnsb.bundle import (
    bundle_to_bytes,
    pack_words,
    quantize_model,
    requantize,
    unpack_words,
)
from nnsb.channel import BscChannel, InjectionTarget, corrupt_bits, corrupt_bundle
from nnsb.codec import (
    BitWord,
    CodecKind,
    CodecSpec,
    half_decode,
    half_encode,
    index_to_word,
)
from nnsb.distortion import distortion_profile, hamming_ranked_bound
from nnsb.engine import (
    Dense,
    ToyConfig,
    _forward_batch,
    evaluate_real,
    make_blobs,
    softmax,
    toy_loss_and_grads,
    train_toy,
)
from nnsb.harness import (
    SweepConfig,
    robustness,
    run_sweep,
    sweep_result_from_means,
    sweep_to_csv,
)

BIN = CodecKind.BINARY_EXPANSION
GRAY = CodecKind.GRAY_CODE
HAMMING = CodecKind.HAMMING_RANKED


def report(n, text):
    print(f"\n[acceptance] criterion {n}: PASS - {text}")


class TestCriterion1HalfFlip:
    def test_exponent_flip_example(self):
        word = BitWord.from_string("0011010101010101")
        assert half_decode(word) == 0.333251953125
        flipped = BitWord.from_string("0111010101010101")
        assert flipped == word.flipped(14)
        assert half_decode(flipped) == 21840.0
        report(1, "binary16 decode 0.333251953125 / bit-14 flip -> 21840.0, exact")


class TestCriterion2HalfMax:
    def test_largest_finite_round_trip(self):
        word = half_encode(65504.0)
        assert str(word) == "0111101111111111"
        assert half_decode(word) == 65504.0
        report(2, "binary16 65504 encode/decode round-trips exactly")


class TestCriterion3DistortionFixtures:
    def test_fixtures(self):
        for q in range(2, 11):
            assert distortion_profile(CodecSpec(BIN, q), k=1).d_max == Fraction(1, 2)
        assert distortion_profile(CodecSpec(GRAY, 2), k=1).d_max == Fraction(3, 4)

        spec3 = CodecSpec(HAMMING, 3)
        words = [str(index_to_word(spec3, i)) for i in range(8)]
        assert words == ["000", "001", "010", "100", "011", "101", "110", "111"]
        assert distortion_profile(spec3, k=1).d_max == Fraction(1, 2)

        # Independent oracle for q=4: enumerate all 16 words x 4 flips over
        # a locally constructed (weight, msb-first string) ranking.
        order = sorted(range(16), key=lambda w: (bin(w).count("1"), format(w, "04b")))
        rank = {w: i for i, w in enumerate(order)}
        oracle = max(
            abs(rank[w] - rank[w ^ (1 << j)]) for w in range(16) for j in range(4)
        )
        assert Fraction(oracle, 16) == Fraction(7, 16)
        assert distortion_profile(CodecSpec(HAMMING, 4), k=1).d_max == Fraction(7, 16)
        report(3, "distortion fixtures: binary 1/2, gray 3/4, hamming q3 order + 1/2, q4 7/16")


class TestCriterion4Theorem1Trend:
    def test_trend_and_bound(self):
        previous = None
        for q in (4, 6, 8, 10, 12):
            hamming_d = distortion_profile(CodecSpec(HAMMING, q), k=1).d_max
            exact_bound, _ = hamming_ranked_bound(q)
            assert hamming_d <= exact_bound
            if previous is not None:
                assert hamming_d <= previous
            previous = hamming_d
            assert distortion_profile(CodecSpec(BIN, q), k=1).d_max == Fraction(1, 2)
        report(4, "hamming-ranked d_max,1 non-increasing and within 2C(q,q/2)/2^q "
                  "for q in {4..12}; binary pinned at 1/2")


def parity_bits(words, nbytes):
    b = np.asarray(words).astype("<u8").view(np.uint8).reshape(-1, 8)[:, :nbytes]
    return np.unpackbits(b, axis=1, bitorder="little").sum(axis=1) & 1


class TestCriterion5ParityDetection:
    def test_exhaustive_masks(self):
        for q in range(2, 13):
            data = np.arange(1 << (q - 1), dtype=np.uint32)
            check = parity_bits(data, 4).astype(np.uint32)
            encoded = data | (check << (q - 1))
            masks = np.arange(1 << q, dtype=np.uint32)
            odd_mask = parity_bits(masks, 4).astype(bool)
            corrupted = encoded[:, None] ^ masks[None, :]
            detected = parity_bits(corrupted.reshape(-1), 4).reshape(corrupted.shape)
            assert np.array_equal(
                detected.astype(bool), np.broadcast_to(odd_mask, corrupted.shape)
            ), f"q={q}"

    def test_nulled_fraction_under_bsc(self):
        q, p, n = 16, 0.01, 120_000
        rng = np.random.default_rng(31)
        data = rng.integers(0, 1 << (q - 1), size=n, dtype=np.uint64)
        check = parity_bits(data, 8).astype(np.uint64)
        words = data | (check << np.uint64(q - 1))
        corrupted, _ = corrupt_bits(
            pack_words(words, q), n * q, BscChannel(p, master_seed=77), trial=0
        )
        nulled = float((parity_bits(unpack_words(corrupted, n, q), 8) == 1).mean())
        expect = 1 - (1 + (1 - 2 * p) ** q) / 2
        se = math.sqrt(expect * (1 - expect) / n)
        assert abs(nulled - expect) < 5 * se
        report(5, f"parity detects all odd / passes all even masks (q<=12); "
                  f"nulled fraction {nulled:.4f} vs {expect:.4f} within 5 SE")


class TestCriterion6DeskScaleExperiment:
    # Geometric-ish rate grid; 20 independent corruption trials per point.
    GRID = (0.0, 0.001, 0.002, 0.003, 0.005, 0.008, 0.0125, 0.02, 0.03, 0.05)

    def test_robustness_experiment(self):
        model, heldout = train_toy(ToyConfig(seed=1))
        clean = evaluate_real(model, heldout)
        assert clean >= 0.95

        # Global grid, as in single-interval quantization of all weights.
        plain = quantize_model(model, CodecSpec(BIN, 16), "global")
        parity = requantize(plain, CodecSpec(BIN, 16, parity=True))
        assert all(t.spec.q == 16 for t in plain.tensors.values())
        assert all(t.spec.q == 16 for t in parity.tensors.values())

        config = SweepConfig(rber_grid=self.GRID, trials=20, master_seed=1235)
        res_plain = run_sweep(plain, heldout, config)
        res_parity = run_sweep(parity, heldout, config)

        # (a) zero-error grid point reproduces the baseline exactly
        assert res_plain.points[0].mean_accuracy == res_plain.baseline_accuracy
        assert res_parity.points[0].mean_accuracy == res_parity.baseline_accuracy

        # (b) accuracy trend is non-increasing with rber (Spearman <= 0)
        rho = scipy.stats.spearmanr(self.GRID, res_plain.mean_accuracies).statistic
        assert rho <= 0

        # parity wrapping shifts the baseline by at most the 15-vs-16-bit
        # precision difference
        assert abs(res_parity.baseline_accuracy - res_plain.baseline_accuracy) <= 0.005

        # (c) nulling direction at equal 16 stored bits per weight
        r_plain = robustness(res_plain, 0.95)
        r_parity = robustness(res_parity, 0.95)
        assert r_parity is not None
        assert r_plain is None or r_parity >= r_plain
        report(6, f"toy experiment: clean={clean:.3f}, spearman={rho:.3f}, "
                  f"R(.95) plain={r_plain} parity={r_parity}")


class TestCriterion7RobustnessFixture:
    def test_published_means(self):
        grid = [i * 0.001 for i in range(15)]
        means = [0.9959, 0.9952, 0.9945, 0.9937, 0.9924,
                 0.9906, 0.9885, 0.9847, 0.9816, 0.9754,
                 0.96952, 0.9576, 0.94875, 0.9339, 0.9224]
        result = sweep_result_from_means(grid, means, baseline_accuracy=0.9961)
        assert robustness(result, 0.95) == 0.012
        report(7, "published means with A=0.9961 give R(0.95) = 0.012 exactly")


class TestCriterion8EngineCorrectness:
    def test_dense_and_conv_match_naive(self):
        # Integer-valued tensors: accumulation order cannot change the sums,
        # so agreement must be exact.
        rng = np.random.default_rng(8)
        for trial in range(100):
            n, din, dout = (int(v) for v in rng.integers(1, 6, size=3))
            x = rng.integers(-8, 9, size=(n, din)).astype(float)
            w = rng.integers(-8, 9, size=(din, dout)).astype(float)
            b = rng.integers(-8, 9, size=dout).astype(float)
            got = _forward_batch((Dense("w", "b"),), {"w": w, "b": b}, x)
            ref = np.array(
                [[sum(x[i, j] * w[j, o] for j in range(din)) + b[o]
                  for o in range(dout)] for i in range(n)]
            )
            assert np.array_equal(got, ref)

        from nnsb.bundle import Conv2D

        for trial in range(100):
            h, w_ = (int(v) for v in rng.integers(3, 7, size=2))
            kh, kw = (int(v) for v in rng.integers(1, 4, size=2))
            cin, cout = (int(v) for v in rng.integers(1, 4, size=2))
            x = rng.integers(-4, 5, size=(1, h, w_, cin)).astype(float)
            k = rng.integers(-4, 5, size=(kh, kw, cin, cout)).astype(float)
            b = rng.integers(-4, 5, size=cout).astype(float)
            got = _forward_batch((Conv2D("k", "b"),), {"k": k, "b": b}, x)
            oh, ow = h - kh + 1, w_ - kw + 1
            ref = np.zeros((1, oh, ow, cout))
            for i in range(oh):
                for j in range(ow):
                    for o in range(cout):
                        acc = 0.0
                        for di, dj, c in itertools.product(
                            range(kh), range(kw), range(cin)
                        ):
                            acc += x[0, i + di, j + dj, c] * k[di, dj, c, o]
                        ref[0, i, j, o] = acc + b[o]
            assert np.array_equal(got, ref)

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(18)
        cfg = ToyConfig(classes=3, dims=4, samples=50, hidden=6, epochs=1, seed=0)
        data = make_blobs(cfg, rng)
        params = {
            "w1": rng.normal(size=(4, 6)),
            "b1": rng.normal(size=6),
            "w2": rng.normal(size=(6, 3)),
            "b2": rng.normal(size=3),
        }
        _, grads = toy_loss_and_grads(params, data.inputs, data.labels)
        h = 1e-6
        checked = 0
        for key in params:
            flat = params[key].reshape(-1)
            for idx in range(flat.size):
                orig = flat[idx]
                flat[idx] = orig + h
                up, _ = toy_loss_and_grads(params, data.inputs, data.labels)
                flat[idx] = orig - h
                down, _ = toy_loss_and_grads(params, data.inputs, data.labels)
                flat[idx] = orig
                numeric = (up - down) / (2 * h)
                analytic = grads[key].reshape(-1)[idx]
                scale = max(abs(numeric), abs(analytic), 1e-8)
                assert abs(numeric - analytic) / scale < 1e-4
                checked += 1
        assert checked == 4 * 6 + 6 + 6 * 3 + 3

    def test_softmax_normalization(self):
        rng = np.random.default_rng(19)
        probs = softmax(rng.normal(scale=30, size=(1000, 7)))
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-9
        report(8, "dense/conv exact vs naive loops (100 each); gradients within "
                  "1e-4 of central differences; softmax rows sum to 1 within 1e-9")


class TestCriterion9Determinism:
    def test_corruption_and_sweep_reproduce(self, toy, toy_bundle16):
        _, heldout = toy
        channel = BscChannel(0.015, master_seed=97)
        target = InjectionTarget(trial_index=4)
        a, fa = corrupt_bundle(toy_bundle16, channel, target)
        b, fb = corrupt_bundle(toy_bundle16, channel, target)
        assert fa == fb
        assert bundle_to_bytes(a) == bundle_to_bytes(b)

        config = SweepConfig(rber_grid=(0.0, 0.01, 0.03), trials=5, master_seed=97)
        csv1 = sweep_to_csv(run_sweep(toy_bundle16, heldout, config))
        csv2 = sweep_to_csv(run_sweep(toy_bundle16, heldout, config))
        assert csv1 == csv2
        report(9, "identical (seed, config) give byte-identical corrupted bundles "
                  "and identical sweep CSV")
