"""Binary symmetric channel over packed bit streams.

Every stored bit flips independently with probability rber.  Flip
positions are drawn by geometric gap sampling (distance to the next flip)
instead of per-bit Bernoulli draws, so corruption stays fast at very low
error rates over large streams; the two samplers are identically
distributed.

Reproducibility contract: the stream of flips is fully determined by
(master_seed, trial index, tensor ordinal), mixed through splitmix64 into
one 64-bit seed per (trial, tensor) pair.  Within this implementation the
output is bit-identical for identical inputs; bit-identical streams
across other implementations are not promised.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .bundle import ModelBundle

_MASK64 = (1 << 64) - 1

SEED_DERIVATION = "splitmix64(splitmix64(splitmix64(master) ^ trial) ^ ordinal)"


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_stream_seed(master_seed: int, trial: int, ordinal: int = 0) -> int:
    """64-bit seed for one (trial, tensor) corruption stream."""
    s = _splitmix64(master_seed & _MASK64)
    s = _splitmix64(s ^ (trial & _MASK64))
    s = _splitmix64(s ^ (ordinal & _MASK64))
    return s


@dataclass(frozen=True)
class BscChannel:
    """Memoryless channel flipping each bit with probability rber."""

    rber: float
    master_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.rber <= 1.0:
            raise ValueError(f"rber must be in [0, 1], got {self.rber}")
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must fit in 64 bits")


@dataclass(frozen=True)
class InjectionTarget:
    """Which tensors of a bundle receive errors, and for which trial.

    An empty/None filter selects every tensor.  The trial index selects an
    independent corruption stream; distinct trials share no randomness.
    """

    tensor_filter: frozenset[str] | None = None
    trial_index: int = 0

    def __post_init__(self):
        if self.trial_index < 0:
            raise ValueError(f"trial_index must be >= 0, got {self.trial_index}")
        if self.tensor_filter is not None:
            object.__setattr__(self, "tensor_filter", frozenset(self.tensor_filter))

    def selects(self, name: str) -> bool:
        return not self.tensor_filter or name in self.tensor_filter


def _flip_positions(rng: np.random.Generator, nbits: int, p: float) -> np.ndarray:
    """Sorted positions of flipped bits in [0, nbits)."""
    if p <= 0.0 or nbits == 0:
        return np.empty(0, dtype=np.int64)
    chunks = []
    offset = 0
    while offset < nbits:
        size = max(128, int((nbits - offset) * p) + 32)
        # numpy saturates huge gaps at int64 max; cap them at nbits+1 so the
        # cumulative sum cannot wrap (a capped gap already ends the stream)
        gaps = np.minimum(rng.geometric(p, size=size), nbits + 1)
        pts = offset + np.cumsum(gaps) - 1
        offset = int(pts[-1]) + 1
        chunks.append(pts)
    pts = np.concatenate(chunks)
    return pts[pts < nbits]


def corrupt_bits(
    packed: np.ndarray,
    nbits: int,
    channel: BscChannel,
    trial: int,
    ordinal: int = 0,
) -> tuple[np.ndarray, int]:
    """Pass a packed little-endian bit stream through the channel.

    Only the first nbits of the stream are eligible; padding bits in the
    final byte never flip.  Returns a corrupted copy and the exact number
    of flipped bits.
    """
    packed = np.asarray(packed, dtype=np.uint8)
    if nbits > packed.size * 8:
        raise ValueError(f"stream of {packed.size} bytes cannot hold {nbits} bits")
    out = packed.copy()
    rng = np.random.default_rng(derive_stream_seed(channel.master_seed, trial, ordinal))
    pts = _flip_positions(rng, nbits, channel.rber)
    if pts.size:
        np.bitwise_xor.at(out, pts >> 3, (np.uint8(1) << (pts & 7).astype(np.uint8)))
    return out, int(pts.size)


def corrupt_bundle(
    bundle: ModelBundle, channel: BscChannel, target: InjectionTarget
) -> tuple[ModelBundle, int]:
    """Corrupt the packed words of every selected tensor of a bundle.

    Layers, grids, metadata, and unselected tensors are untouched.  Each
    tensor keeps its own stream keyed by its ordinal among all tensors, so
    a tensor sees the same errors whether it is corrupted alone or as part
    of the full model.
    """
    if target.tensor_filter:
        unknown = set(target.tensor_filter) - set(bundle.tensors)
        if unknown:
            raise ValueError(f"unknown tensors in filter: {sorted(unknown)}")
    tensors = {}
    total = 0
    for ordinal, (name, tensor) in enumerate(bundle.tensors.items()):
        if target.selects(name):
            packed, flips = corrupt_bits(
                tensor.packed, tensor.bit_count, channel, target.trial_index, ordinal
            )
            tensors[name] = replace(tensor, packed=packed)
            total += flips
        else:
            tensors[name] = tensor
    return replace(bundle, tensors=tensors), total
