#!/usr/bin/env python3
"""How one flipped storage bit changes a stored weight, per representation.

Walks through the three index codecs and IEEE binary16 on concrete words,
showing why the float16 exponent is fragile and how the hamming-ranked
order keeps single-bit flips close in index space.
"""

import numpy as np

from nnsb import (
    BitWord,
    CodecKind,
    CodecSpec,
    QuantizationGrid,
    half_decode,
    half_encode,
    index_to_word,
    quantize_index,
    reconstruct_value,
    word_to_index,
)

print("=== IEEE binary16: the exponent failure mode ===")
w = 1.0 / 3.0
word = half_encode(w)
print(f"encode({w:.6f})        = {word}  (decodes to {half_decode(word)})")
for j in (14, 13, 10, 0):
    flipped = word.flipped(j)
    print(f"flip bit {j:2d}            -> {flipped}  decodes to {half_decode(flipped)}")
print("one exponent bit turns a third into twenty-one thousand.\n")

print("=== Uniform quantization of [-1, 1] at q=4 ===")
grid = QuantizationGrid(-1.0, 1.0, 4)
for w in (-0.83, 0.0, 0.62, 1.0):
    i = quantize_index(w, grid)
    print(f"w={w:+.2f} -> cell {i:2d} -> stored midpoint {reconstruct_value(i, grid):+.4f}")
print()

print("=== The three index codecs at q=4 ===")
specs = {kind.value: CodecSpec(kind, 4) for kind in
         (CodecKind.BINARY_EXPANSION, CodecKind.GRAY_CODE, CodecKind.HAMMING_RANKED)}
header = "index | " + " | ".join(f"{name:^7}" for name in specs)
print(header)
for i in range(16):
    row = " | ".join(f"{str(index_to_word(spec, i)):^7}" for spec in specs.values())
    print(f"{i:5d} | {row}")
print()

print("=== Worst single-flip index jump per codec (q=4) ===")
for name, spec in specs.items():
    worst = 0
    for i in range(16):
        word = index_to_word(spec, i)
        for j in range(4):
            other = word_to_index(spec, word.flipped(j))
            worst = max(worst, abs(other - i))
    print(f"{name:8s}: max |index jump| = {worst} of 16")
print("\nbinary expansion always risks a jump of half the range;")
print("the hamming-ranked order caps jumps by the weight-class sizes.")
