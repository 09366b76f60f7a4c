"""Bijections between quantization indices and fixed-width bit words.

Bit convention used throughout the package: a word of width q is an
unsigned integer whose bit j (bit 0 = least significant) is expansion
bit b_j, so a word's integer value is sum(b_j * 2**j).  Rendering a word
as a string prints the most significant bit first; lexicographic order
of those strings coincides with numeric order at fixed width.

Four storage representations are supported:

* binary expansion  -- word value equals the index
* Gray code         -- reflected binary, adjacent indices differ in one bit
* hamming-ranked    -- words sorted by (Hamming weight, msb-first string);
                      the index is the rank, computed by combinadic
                      (binomial-coefficient) ranking within weight classes
* ieee-half         -- IEEE 754 binary16, via half_encode / half_decode

The first three map a contiguous index range {0 .. 2**width - 1}; the
half-precision codec maps real values directly and has no index space.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

HALF_MAX = 65504.0  # (2 - 2**-10) * 2**15, largest finite binary16


class CodecKind(Enum):
    BINARY_EXPANSION = "binary"
    GRAY_CODE = "gray"
    HAMMING_RANKED = "hamming"
    IEEE_HALF = "half"


@dataclass(frozen=True)
class BitWord:
    """A fixed-width unsigned bit pattern. Bits above width-1 must be zero."""

    width: int
    bits: int

    def __post_init__(self):
        if not 1 <= self.width <= 64:
            raise ValueError(f"width must be in 1..64, got {self.width}")
        if not 0 <= self.bits < (1 << self.width):
            raise ValueError(
                f"bits 0x{self.bits:x} out of range for width {self.width}"
            )

    @classmethod
    def from_string(cls, s: str) -> "BitWord":
        """Parse an msb-first bit string such as "101"."""
        return cls(len(s), int(s, 2))

    def bit(self, j: int) -> int:
        """Expansion bit b_j."""
        if not 0 <= j < self.width:
            raise ValueError(f"bit index {j} out of range for width {self.width}")
        return (self.bits >> j) & 1

    def flipped(self, j: int) -> "BitWord":
        """Copy of this word with bit j inverted."""
        if not 0 <= j < self.width:
            raise ValueError(f"bit index {j} out of range for width {self.width}")
        return BitWord(self.width, self.bits ^ (1 << j))

    @property
    def hamming_weight(self) -> int:
        return self.bits.bit_count()

    def __str__(self) -> str:
        return format(self.bits, f"0{self.width}b")


@dataclass(frozen=True)
class QuantizationGrid:
    """Uniform grid of 2**q cells covering [w_min, w_max]."""

    w_min: float
    w_max: float
    q: int

    def __post_init__(self):
        if not (math.isfinite(self.w_min) and math.isfinite(self.w_max)):
            raise ValueError("grid bounds must be finite")
        if not self.w_min < self.w_max:
            raise ValueError(f"need w_min < w_max, got [{self.w_min}, {self.w_max}]")
        if not 1 <= self.q <= 64:
            raise ValueError(f"q must be in 1..64, got {self.q}")

    @property
    def cell_width(self) -> float:
        return (self.w_max - self.w_min) / float(1 << self.q)


@dataclass(frozen=True)
class CodecSpec:
    """Which bijection maps indices to bit patterns, and whether one of the
    q stored bits is reserved as an even-parity check bit.

    With parity enabled the data word is q-1 bits wide and the index space
    shrinks to {0 .. 2**(q-1) - 1}; the check bit occupies the most
    significant stored position (see the nulling module).
    """

    kind: CodecKind
    q: int = 16
    parity: bool = False

    def __post_init__(self):
        if not 1 <= self.q <= 64:
            raise ValueError(f"q must be in 1..64, got {self.q}")
        if self.kind is CodecKind.IEEE_HALF:
            if self.q != 16:
                raise ValueError("ieee-half is a fixed 16-bit format")
            if self.parity:
                raise ValueError("parity wrapping is not defined for ieee-half")
        if self.parity and self.q < 2:
            raise ValueError("parity needs at least one data bit")

    @property
    def data_width(self) -> int:
        """Width of the index-coding portion of each stored word."""
        return self.q - 1 if self.parity else self.q

    @property
    def index_count(self) -> int:
        return 1 << self.data_width


def quantize_index(w: float, grid: QuantizationGrid) -> int:
    """Cell index of weight w: floor((clamp(w) - w_min) / cell_width).

    Out-of-range weights clamp to the grid; w == w_max maps to the top
    index 2**q - 1 rather than overflowing.
    """
    w = float(w)
    if not math.isfinite(w):
        raise ValueError(f"cannot quantize non-finite weight {w!r}")
    w = min(max(w, grid.w_min), grid.w_max)
    n = 1 << grid.q
    i = math.floor((w - grid.w_min) / (grid.w_max - grid.w_min) * n)
    return min(i, n - 1)


def reconstruct_value(i: int, grid: QuantizationGrid) -> float:
    """Midpoint of cell i: w_min + cell_width * (1/2 + i)."""
    if not 0 <= i < (1 << grid.q):
        raise ValueError(f"index {i} out of range for q={grid.q}")
    return grid.w_min + grid.cell_width * (0.5 + i)


# --- Gray code ---------------------------------------------------------


def _gray_encode(i: int) -> int:
    return i ^ (i >> 1)


def _gray_decode(g: int) -> int:
    i = g
    g >>= 1
    while g:
        i ^= g
        g >>= 1
    return i


# --- Hamming-weight ranking --------------------------------------------
#
# Words of width q sort by (Hamming weight, msb-first string).  Within a
# weight class the string order equals numeric order, which equals
# colexicographic order on the set of one-bit positions, so class-local
# ranks come from the standard combinadic formulas.


@lru_cache(maxsize=None)
def _class_starts(q: int) -> tuple[int, ...]:
    """starts[k] = number of width-q words with Hamming weight < k."""
    starts = [0] * (q + 2)
    for k in range(q + 1):
        starts[k + 1] = starts[k] + math.comb(q, k)
    return tuple(starts)


def _colex_rank(positions: list[int]) -> int:
    return sum(math.comb(c, j + 1) for j, c in enumerate(positions))


def _colex_unrank(r: int, n: int, k: int) -> list[int]:
    positions = [0] * k
    while k > 0:
        n -= 1
        c = math.comb(n, k)
        if r >= c:
            r -= c
            k -= 1
            positions[k] = n
    return positions


def _hamming_rank(bits: int, q: int) -> int:
    k = bits.bit_count()
    positions = [j for j in range(q) if (bits >> j) & 1]
    return _class_starts(q)[k] + _colex_rank(positions)


def _hamming_unrank(i: int, q: int) -> int:
    starts = _class_starts(q)
    k = 0
    while starts[k + 1] <= i:
        k += 1
    bits = 0
    for p in _colex_unrank(i - starts[k], q, k):
        bits |= 1 << p
    return bits


# --- index <-> word ----------------------------------------------------


def index_to_word(spec: CodecSpec, i: int) -> BitWord:
    """Bit pattern stored for quantization index i (data word, no parity)."""
    if spec.kind is CodecKind.IEEE_HALF:
        raise ValueError("ieee-half has no index space; use half_encode")
    width = spec.data_width
    if not 0 <= i < (1 << width):
        raise ValueError(f"index {i} out of range for data width {width}")
    if spec.kind is CodecKind.BINARY_EXPANSION:
        bits = i
    elif spec.kind is CodecKind.GRAY_CODE:
        bits = _gray_encode(i)
    else:
        bits = _hamming_unrank(i, width)
    return BitWord(width, bits)


def word_to_index(spec: CodecSpec, b: BitWord) -> int:
    """Exact inverse of index_to_word."""
    if spec.kind is CodecKind.IEEE_HALF:
        raise ValueError("ieee-half has no index space; use half_decode")
    if b.width != spec.data_width:
        raise ValueError(
            f"word width {b.width} does not match codec data width {spec.data_width}"
        )
    if spec.kind is CodecKind.BINARY_EXPANSION:
        return b.bits
    if spec.kind is CodecKind.GRAY_CODE:
        return _gray_decode(b.bits)
    return _hamming_rank(b.bits, b.width)


# --- IEEE 754 binary16 --------------------------------------------------


def half_encode(w: float) -> BitWord:
    """Encode a real to IEEE 754 binary16 (round to nearest, ties to even).

    Values beyond the largest finite half (65504) are rejected rather
    than silently becoming infinity.
    """
    w = float(w)
    if not math.isfinite(w):
        raise ValueError(f"cannot encode non-finite value {w!r}")
    if abs(w) > HALF_MAX:
        raise OverflowError(f"|{w}| exceeds largest finite binary16 value {HALF_MAX}")

    d = struct.unpack("<Q", struct.pack("<d", w))[0]
    sign = (d >> 63) & 1
    e = (d >> 52) & 0x7FF
    m = d & ((1 << 52) - 1)
    if e == 0 and m == 0:
        return BitWord(16, sign << 15)

    # exact value is sig * 2**exp2 with sig a positive integer
    if e == 0:
        sig, exp2 = m, -1074
    else:
        sig, exp2 = m | (1 << 52), e - 1075

    def round_half_even(num: int, shift: int) -> int:
        # round(num / 2**shift) with ties to even; shift may be <= 0
        if shift <= 0:
            return num << -shift
        q, r = divmod(num, 1 << shift)
        half = 1 << (shift - 1)
        if r > half or (r == half and q & 1):
            q += 1
        return q

    top = sig.bit_length() - 1 + exp2  # floor(log2 |w|)
    if top < -14:
        # subnormal target: nearest multiple of 2**-24
        n = round_half_even(sig, -24 - exp2)
        if n >= 1 << 10:  # rounded up into the smallest normal
            return BitWord(16, (sign << 15) | (1 << 10))
        return BitWord(16, (sign << 15) | n)

    # normal target: significand on the 2**(top-10) grid
    frac = round_half_even(sig, top - 10 - exp2)
    if frac == 1 << 11:  # carry into the next binade
        top += 1
        frac = 1 << 10
    biased = top + 15
    return BitWord(16, (sign << 15) | (biased << 10) | (frac - (1 << 10)))


def half_decode(b: BitWord) -> float:
    """Value of an IEEE 754 binary16 pattern.

    Total function: exponent-all-ones patterns decode to +/-infinity or
    NaN and are returned as-is, so corrupted words keep their corrupted
    meaning.
    """
    if b.width != 16:
        raise ValueError(f"binary16 word must be 16 bits wide, got {b.width}")
    sign = -1.0 if (b.bits >> 15) & 1 else 1.0
    e = (b.bits >> 10) & 0x1F
    m = b.bits & 0x3FF
    if e == 0x1F:
        if m:
            return math.nan
        return sign * math.inf
    if e == 0:
        return sign * math.ldexp(m, -24)
    return sign * math.ldexp((1 << 10) + m, e - 25)
