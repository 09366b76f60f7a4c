"""Distortion of index codecs under bit flips.

The distortion between two equal-width bit patterns b1, b2 under a codec
with index map f is |f(b1) - f(b2)| / 2**q: the normalized index distance
a storage error of that shape would cause.  Profiles aggregate this over
every word's Hamming-ball neighborhood of radius k, either exhaustively
or by seeded sampling, and are kept as exact rationals so fixture tests
never depend on float rounding.

The denominator is 2**q although the index range is 2**q - 1; the scale
factor (2**q - 1)/2**q is irrelevant for comparisons and vanishes as q
grows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .codec import BitWord, CodecKind, CodecSpec, word_to_index

# Exhaustive profiling is refused beyond this many (word, neighbor) pairs.
DEFAULT_WORK_BUDGET = 100_000_000


@dataclass(frozen=True)
class Exhaustive:
    budget: int = DEFAULT_WORK_BUDGET


@dataclass(frozen=True)
class Sampled:
    samples: int
    seed: int = 0


@dataclass(frozen=True)
class DistortionReport:
    """Worst-case and average distortion of a codec over radius-k flips."""

    spec: CodecSpec
    q: int
    k: int
    d_max: Fraction
    d_ave: Fraction
    method: Exhaustive | Sampled
    shell_only: bool = False

    def __post_init__(self):
        if not 0 <= self.d_ave <= self.d_max < 1:
            raise ValueError(
                f"inconsistent distortion report: ave={self.d_ave} max={self.d_max}"
            )

    @property
    def d_max_float(self) -> float:
        return float(self.d_max)

    @property
    def d_ave_float(self) -> float:
        return float(self.d_ave)


def pair_distortion(spec: CodecSpec, b1: BitWord, b2: BitWord) -> Fraction:
    """|f(b1) - f(b2)| / 2**q as an exact rational."""
    if b1.width != b2.width or b1.width != spec.data_width:
        raise ValueError(
            f"widths ({b1.width}, {b2.width}) must both equal codec width {spec.data_width}"
        )
    i1 = word_to_index(spec, b1)
    i2 = word_to_index(spec, b2)
    return Fraction(abs(i1 - i2), 1 << spec.data_width)


def _flip_masks(q: int, k: int, shell_only: bool) -> list[int]:
    weights = [k] if shell_only else range(1, k + 1)
    masks = []
    for w in weights:
        for positions in itertools.combinations(range(q), w):
            m = 0
            for p in positions:
                m |= 1 << p
            masks.append(m)
    return masks


def _index_table(spec: CodecSpec) -> np.ndarray:
    q = spec.data_width
    table = np.empty(1 << q, dtype=np.int64)
    for bits in range(1 << q):
        table[bits] = word_to_index(spec, BitWord(q, bits))
    return table


def distortion_profile(
    spec: CodecSpec,
    k: int = 1,
    method: Exhaustive | Sampled = Exhaustive(),
    shell_only: bool = False,
) -> DistortionReport:
    """Profile d_max and d_ave over neighbors within Hamming distance k.

    The neighborhood is the punctured ball 1 <= d_H <= k (distance 0 is
    excluded; it contributes zero and would only dilute averages), or the
    exact-distance shell when shell_only is set.  d_ave is the mean over
    words of each word's neighborhood mean.  Exhaustive enumeration is
    exact; Sampled draws words and neighbors from a seeded generator and
    reports estimates in the same exact-rational form.
    """
    if spec.kind is CodecKind.IEEE_HALF:
        raise ValueError("distortion profiles are defined for index codecs only")
    if k < 1:
        raise ValueError(f"radius k must be >= 1, got {k}")
    q = spec.data_width
    if k > q:
        raise ValueError(f"radius {k} exceeds word width {q}")
    if isinstance(method, Exhaustive):
        return _profile_exhaustive(spec, q, k, method, shell_only)
    return _profile_sampled(spec, q, k, method, shell_only)


def _profile_exhaustive(
    spec: CodecSpec, q: int, k: int, method: Exhaustive, shell_only: bool
) -> DistortionReport:
    masks = _flip_masks(q, k, shell_only)
    work = (1 << q) * len(masks)
    if work > method.budget:
        raise ValueError(
            f"exhaustive profile needs {work} pairs (budget {method.budget}); "
            "use a Sampled method instead"
        )
    table = _index_table(spec)
    words = np.arange(1 << q, dtype=np.int64)
    worst = 0
    total = 0
    for m in masks:
        jumps = np.abs(table[words] - table[words ^ m])
        worst = max(worst, int(jumps.max()))
        total += int(jumps.sum())
    denom = 1 << q
    return DistortionReport(
        spec=spec,
        q=q,
        k=k,
        d_max=Fraction(worst, denom),
        d_ave=Fraction(total, denom * denom * len(masks)),
        method=method,
        shell_only=shell_only,
    )


def _profile_sampled(
    spec: CodecSpec, q: int, k: int, method: Sampled, shell_only: bool
) -> DistortionReport:
    if method.samples < 1:
        raise ValueError("sample count must be positive")
    rng = np.random.default_rng(method.seed)
    table = _index_table(spec)

    weights = [k] if shell_only else list(range(1, k + 1))
    class_sizes = np.array([math.comb(q, w) for w in weights], dtype=float)
    class_p = class_sizes / class_sizes.sum()

    if spec.kind is CodecKind.HAMMING_RANKED:
        words = _stratified_words(rng, q, method.samples)
        word_p = _word_class_probability(words, q)
    else:
        words = rng.integers(0, 1 << q, size=method.samples, dtype=np.int64)
        word_p = np.full(method.samples, 1.0 / method.samples)

    worst = 0
    weighted = 0.0
    for idx, w in enumerate(words):
        nweight = int(rng.choice(len(weights), p=class_p))
        positions = rng.choice(q, size=weights[nweight], replace=False)
        m = 0
        for p in positions:
            m |= 1 << int(p)
        jump = int(abs(table[w] - table[w ^ m]))
        worst = max(worst, jump)
        weighted += word_p[idx] * jump
    denom = 1 << q
    # Average as a rational: round the weighted mean onto the index grid
    # scaled by a fixed precision so the report stays exact-rational.
    ave = Fraction(weighted / denom).limit_denominator(denom * denom)
    d_max = Fraction(worst, denom)
    if ave > d_max:  # estimator noise; clamp into the valid range
        ave = d_max
    return DistortionReport(
        spec=spec,
        q=q,
        k=k,
        d_max=d_max,
        d_ave=ave,
        method=method,
        shell_only=shell_only,
    )


def _stratified_words(rng: np.random.Generator, q: int, samples: int) -> np.ndarray:
    """Sample words evenly across Hamming-weight classes.

    Uniform word sampling almost never sees the extreme-weight classes
    whose members sit at the ends of the hamming-ranked order; stratifying
    keeps them represented.  Estimates are re-weighted by true class
    probability in _word_class_probability.
    """
    out = np.empty(samples, dtype=np.int64)
    for i in range(samples):
        weight = int(rng.integers(0, q + 1))
        positions = rng.choice(q, size=weight, replace=False)
        bits = 0
        for p in positions:
            bits |= 1 << int(p)
        out[i] = bits
    return out


def _word_class_probability(words: np.ndarray, q: int) -> np.ndarray:
    counts = np.zeros(q + 1, dtype=np.int64)
    weights = np.array([int(w).bit_count() for w in words])
    for w in weights:
        counts[w] += 1
    true_p = np.array([math.comb(q, j) / float(1 << q) for j in range(q + 1)])
    per_class = np.divide(
        true_p, counts, out=np.zeros_like(true_p), where=counts > 0
    )
    return per_class[weights]


def hamming_ranked_bound(q: int) -> tuple[Fraction, float]:
    """Worst-case single-flip distortion bound for the hamming-ranked codec.

    A single flip moves a word into an adjacent weight class, so the index
    jump is at most the two largest class sizes combined: exact bound
    2*C(q, ceil(q/2)) / 2**q, with its Stirling approximation
    2*sqrt(2/(pi*q)) as the closed form that vanishes as q grows.
    """
    if not 2 <= q <= 64:
        raise ValueError(f"q must be in 2..64, got {q}")
    exact = Fraction(2 * math.comb(q, math.ceil(q / 2)), 1 << q)
    stirling = 2.0 * math.sqrt(2.0 / (math.pi * q))
    return exact, stirling
