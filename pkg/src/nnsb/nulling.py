"""Per-weight even-parity check bit with detected-error weight nulling.

Each stored q-bit word carries q-1 data bits plus one check bit chosen so
the modulo-two sum of all q bits is zero.  Any odd number of flipped bits
is detected; a detected weight decodes to exactly 0.0 ("nulled") instead
of a corrupted value.  Even-weight error patterns pass undetected.

The check bit occupies the most significant stored position; this is part
of the bundle file-format contract.
"""

from __future__ import annotations

from .codec import BitWord, CodecSpec, QuantizationGrid, reconstruct_value, word_to_index


def parity_encode(data: BitWord) -> BitWord:
    """Append an even-parity check bit above the data bits."""
    check = data.bits.bit_count() & 1
    return BitWord(data.width + 1, data.bits | (check << data.width))


def parity_decode(
    word: BitWord, spec: CodecSpec, grid: QuantizationGrid
) -> tuple[float, bool]:
    """Decode a parity-wrapped stored word to (value, nulled).

    Odd total parity means at least one bit flipped: the weight is nulled
    to 0.0.  Otherwise the check bit is stripped and the data word decodes
    through the codec's index mapping and the grid midpoint formula.
    """
    if not spec.parity:
        raise ValueError("codec spec does not enable parity")
    if word.width != spec.q:
        raise ValueError(f"stored word must be {spec.q} bits wide, got {word.width}")
    if grid.q != spec.data_width:
        raise ValueError(
            f"grid resolution {grid.q} does not match data width {spec.data_width}"
        )
    if word.bits.bit_count() & 1:
        return 0.0, True
    data = BitWord(spec.data_width, word.bits & ((1 << spec.data_width) - 1))
    return reconstruct_value(word_to_index(spec, data), grid), False
