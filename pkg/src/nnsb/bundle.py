"""Quantized-weight model bundles and their bit-exact file format.

A bundle is an ordered list of layer descriptors plus named quantized
tensors.  Each tensor stores one q-bit word per element, packed into a
contiguous little-endian bit stream: word w occupies stream bits
[w*q, (w+1)*q) with its bit 0 first, and stream bit n lives at bit n%8 of
byte n//8.  No padding between words; the final byte is zero-padded.

NNSB v1 file layout (all integers little-endian):

    magic "NNSB" | u16 version | u32 layer count | layer descriptors
    | u32 tensor count | tensor blocks | u32 metadata count
    | metadata pairs | u32 CRC-32 of all preceding bytes

    layer descriptor: u8 kind, then per kind:
        0 dense      weights name, bias name      (u16 length + UTF-8 each)
        1 conv2d     kernels name, bias name
        2 maxpool2d  u8 window_h, u8 window_w
        3 activation u8 function (0 relu, 1 sigmoid)
        4 flatten    -
        5 softmax    -

    tensor block: name | u8 codec (0 binary, 1 gray, 2 hamming, 3 half)
        | u8 q | u8 parity | f64 w_min | f64 w_max | u8 rank | u32 dims
        | ceil(count*q/8) packed bytes

    metadata pair: key, value (u16 length + UTF-8 each), sorted by key

The trailing CRC is file integrity only; it is unrelated to the
per-weight parity bit under study, which lives inside the packed words.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .codec import (
    BitWord,
    CodecKind,
    CodecSpec,
    QuantizationGrid,
    half_decode,
    half_encode,
    index_to_word,
    word_to_index,
)

MAGIC = b"NNSB"
VERSION = 1

# Constant tensors get their degenerate grid widened by this much per side.
CONSTANT_GRID_EPSILON = 1e-6

_CODEC_IDS = {
    CodecKind.BINARY_EXPANSION: 0,
    CodecKind.GRAY_CODE: 1,
    CodecKind.HAMMING_RANKED: 2,
    CodecKind.IEEE_HALF: 3,
}
_CODEC_BY_ID = {v: k for k, v in _CODEC_IDS.items()}

_ACTIVATIONS = ("relu", "sigmoid")

# Index<->word lookup tables are built for widths up to this; wider codecs
# fall back to per-element scalar conversion.
_TABLE_WIDTH_LIMIT = 20


class BundleFormatError(ValueError):
    """Raised for malformed, truncated, or corrupted bundle files."""


# --- layer descriptors --------------------------------------------------


@dataclass(frozen=True)
class Dense:
    weights: str
    bias: str


@dataclass(frozen=True)
class Conv2D:
    """2-D convolution, valid padding, stride 1, channels-last."""

    kernels: str
    bias: str


@dataclass(frozen=True)
class MaxPool2D:
    window: tuple[int, int] = (2, 2)

    def __post_init__(self):
        if len(self.window) != 2 or min(self.window) < 1 or max(self.window) > 255:
            raise ValueError(f"bad pooling window {self.window}")
        object.__setattr__(self, "window", tuple(int(w) for w in self.window))


@dataclass(frozen=True)
class Activation:
    fn: str

    def __post_init__(self):
        if self.fn not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.fn!r}; use one of {_ACTIVATIONS}")


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Softmax:
    pass


Layer = Dense | Conv2D | MaxPool2D | Activation | Flatten | Softmax


def _layer_tensor_names(layer: Layer) -> tuple[str, ...]:
    if isinstance(layer, Dense):
        return (layer.weights, layer.bias)
    if isinstance(layer, Conv2D):
        return (layer.kernels, layer.bias)
    return ()


# --- bit packing ---------------------------------------------------------


def pack_words(words: np.ndarray, q: int) -> np.ndarray:
    """Pack q-bit words into the contiguous little-endian bit stream."""
    words = np.asarray(words, dtype=np.uint64)
    shifts = np.arange(q, dtype=np.uint64)
    bits = ((words[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bits.reshape(-1), bitorder="little")


def unpack_words(packed: np.ndarray, count: int, q: int) -> np.ndarray:
    """Inverse of pack_words; returns a uint64 array of length count."""
    packed = np.asarray(packed, dtype=np.uint8)
    if packed.size * 8 < count * q:
        raise BundleFormatError(
            f"packed stream too short: {packed.size} bytes for {count} x {q} bits"
        )
    bits = np.unpackbits(packed, count=count * q, bitorder="little")
    shifts = np.arange(q, dtype=np.uint64)
    return (bits.reshape(count, q).astype(np.uint64) << shifts).sum(
        axis=1, dtype=np.uint64
    )


def _popcount(words: np.ndarray) -> np.ndarray:
    b = words.astype("<u8").view(np.uint8).reshape(-1, 8)
    return np.unpackbits(b, axis=1, bitorder="little").sum(axis=1)


# --- codec lookup tables --------------------------------------------------


@lru_cache(maxsize=None)
def _word_table(kind: CodecKind, width: int) -> np.ndarray:
    """word bits per index, for every index of a width-bit codec."""
    if width > _TABLE_WIDTH_LIMIT:
        raise ValueError(f"width {width} too large for table; use scalar path")
    n = 1 << width
    if kind is CodecKind.BINARY_EXPANSION:
        return np.arange(n, dtype=np.uint64)
    if kind is CodecKind.GRAY_CODE:
        i = np.arange(n, dtype=np.uint64)
        return i ^ (i >> np.uint64(1))
    if kind is CodecKind.HAMMING_RANKED:
        values = np.arange(n, dtype=np.uint64)
        weights = _popcount(values)
        return values[np.lexsort((values, weights))]
    raise ValueError(f"no index table for {kind}")


@lru_cache(maxsize=None)
def _rank_table(kind: CodecKind, width: int) -> np.ndarray:
    """index per word bits; inverse permutation of _word_table."""
    table = _word_table(kind, width)
    inverse = np.empty(table.size, dtype=np.int64)
    inverse[table] = np.arange(table.size, dtype=np.int64)
    return inverse


@lru_cache(maxsize=None)
def _half_value_table() -> np.ndarray:
    """Decoded float64 value of every 16-bit pattern (inf/NaN included)."""
    return np.array(
        [half_decode(BitWord(16, b)) for b in range(1 << 16)], dtype=np.float64
    )


# --- domain types ---------------------------------------------------------


@dataclass(frozen=True)
class QuantizedTensor:
    """One named tensor stored as packed q-bit words in row-major order."""

    name: str
    shape: tuple[int, ...]
    grid: QuantizationGrid
    spec: CodecSpec
    packed: np.ndarray

    def __post_init__(self):
        if not self.name:
            raise ValueError("tensor name must be non-empty")
        object.__setattr__(self, "shape", tuple(int(d) for d in self.shape))
        if any(d < 1 for d in self.shape):
            raise ValueError(f"bad shape {self.shape}")
        if self.spec.kind is not CodecKind.IEEE_HALF and self.grid.q != self.spec.data_width:
            raise ValueError(
                f"grid resolution {self.grid.q} != codec data width {self.spec.data_width}"
            )
        packed = np.ascontiguousarray(self.packed, dtype=np.uint8)
        object.__setattr__(self, "packed", packed)
        expected = (self.count * self.spec.q + 7) // 8
        if packed.size != expected:
            raise ValueError(
                f"tensor {self.name}: {packed.size} packed bytes, expected {expected}"
            )

    @property
    def count(self) -> int:
        return math.prod(self.shape)

    @property
    def bit_count(self) -> int:
        return self.count * self.spec.q

    def words(self) -> np.ndarray:
        return unpack_words(self.packed, self.count, self.spec.q)

    @classmethod
    def from_words(
        cls,
        name: str,
        shape: tuple[int, ...],
        grid: QuantizationGrid,
        spec: CodecSpec,
        words: np.ndarray,
    ) -> "QuantizedTensor":
        words = np.asarray(words, dtype=np.uint64)
        if words.size != math.prod(shape):
            raise ValueError(f"{words.size} words for shape {shape}")
        return cls(name, tuple(shape), grid, spec, pack_words(words, spec.q))


@dataclass(frozen=True)
class ModelBundle:
    """Ordered layers plus the quantized tensors they reference."""

    layers: tuple[Layer, ...]
    tensors: dict[str, QuantizedTensor]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        for layer in self.layers:
            for name in _layer_tensor_names(layer):
                if name not in self.tensors:
                    raise ValueError(f"layer references missing tensor {name!r}")
        for name, tensor in self.tensors.items():
            if tensor.name != name:
                raise ValueError(f"tensor key {name!r} != tensor name {tensor.name!r}")

    @property
    def total_weights(self) -> int:
        return sum(t.count for t in self.tensors.values())

    @property
    def total_bits(self) -> int:
        return sum(t.bit_count for t in self.tensors.values())


@dataclass(frozen=True)
class RealModel:
    """Float-valued counterpart of a bundle, as produced by training."""

    layers: tuple[Layer, ...]
    arrays: dict[str, np.ndarray]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        arrays = {
            name: np.ascontiguousarray(a, dtype=np.float64)
            for name, a in self.arrays.items()
        }
        object.__setattr__(self, "arrays", arrays)
        for layer in self.layers:
            for name in _layer_tensor_names(layer):
                if name not in arrays:
                    raise ValueError(f"layer references missing array {name!r}")


@dataclass(frozen=True)
class LabeledDataset:
    """Feature tensors with integer class labels."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        inputs = np.asarray(self.inputs)
        labels = np.asarray(self.labels, dtype=np.int64)
        if inputs.shape[0] != labels.shape[0]:
            raise ValueError(
                f"{inputs.shape[0]} inputs vs {labels.shape[0]} labels"
            )
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if labels.size and labels.min() < 0:
            raise ValueError("labels must be non-negative")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.labels.shape[0])


# --- quantize / dequantize -------------------------------------------------


def _tensor_grid(values: np.ndarray, width: int) -> tuple[QuantizationGrid, bool]:
    lo = float(values.min())
    hi = float(values.max())
    widened = False
    if lo == hi:
        lo -= CONSTANT_GRID_EPSILON
        hi += CONSTANT_GRID_EPSILON
        widened = True
    return QuantizationGrid(lo, hi, width), widened


def _quantize_array(values: np.ndarray, grid: QuantizationGrid) -> np.ndarray:
    """Vectorized quantize_index over an array (same arithmetic)."""
    n = 1 << grid.q
    w = np.clip(values, grid.w_min, grid.w_max)
    idx = np.floor((w - grid.w_min) / (grid.w_max - grid.w_min) * n).astype(np.int64)
    return np.minimum(idx, n - 1)


def _reconstruct_array(indices: np.ndarray, grid: QuantizationGrid) -> np.ndarray:
    """Vectorized reconstruct_value (midpoints), same arithmetic."""
    return grid.w_min + grid.cell_width * (0.5 + indices.astype(np.float64))


def quantize_tensor(
    name: str, values: np.ndarray, spec: CodecSpec, grid: QuantizationGrid | None = None
) -> tuple[QuantizedTensor, bool]:
    """Encode one real-valued array under a codec; returns (tensor, widened).

    With no explicit grid, the tensor's own [min, max] is used; a constant
    tensor's degenerate range is widened by a fixed epsilon.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    if not np.isfinite(values).all():
        raise ValueError(f"tensor {name!r} contains non-finite weights")
    if values.size == 0:
        raise ValueError(f"tensor {name!r} is empty")

    widened = False
    if spec.kind is CodecKind.IEEE_HALF:
        if grid is None:
            grid, widened = _tensor_grid(values, 16)
        words = np.array(
            [half_encode(v).bits for v in values.reshape(-1)], dtype=np.uint64
        )
        return QuantizedTensor.from_words(name, values.shape, grid, spec, words), widened

    if grid is None:
        grid, widened = _tensor_grid(values, spec.data_width)
    indices = _quantize_array(values.reshape(-1), grid)
    if spec.data_width <= _TABLE_WIDTH_LIMIT:
        words = _word_table(spec.kind, spec.data_width)[indices]
    else:
        base = CodecSpec(spec.kind, spec.data_width)
        words = np.array(
            [index_to_word(base, int(i)).bits for i in indices], dtype=np.uint64
        )
    if spec.parity:
        check = (_popcount(words) & 1).astype(np.uint64)
        words = words | (check << np.uint64(spec.data_width))
    return QuantizedTensor.from_words(name, values.shape, grid, spec, words), widened


def quantize_model(
    model: RealModel, spec: CodecSpec, grid_policy: str = "per-tensor"
) -> ModelBundle:
    """Quantize every array of a real model into a bundle.

    grid_policy "per-tensor" derives each tensor's grid from its own value
    range; "global" spans the min/max over all arrays, reproducing the
    single-interval reading of weight quantization.
    """
    if grid_policy not in ("per-tensor", "global"):
        raise ValueError(f"unknown grid policy {grid_policy!r}")
    metadata = dict(model.metadata)
    metadata["codec"] = spec.kind.value
    metadata["q"] = str(spec.q)
    metadata["parity"] = "1" if spec.parity else "0"
    metadata["grid_policy"] = grid_policy

    shared: QuantizationGrid | None = None
    if grid_policy == "global":
        lo = min(float(a.min()) for a in model.arrays.values())
        hi = max(float(a.max()) for a in model.arrays.values())
        if lo == hi:
            lo -= CONSTANT_GRID_EPSILON
            hi += CONSTANT_GRID_EPSILON
            metadata["grid_widened"] = str(CONSTANT_GRID_EPSILON)
        width = 16 if spec.kind is CodecKind.IEEE_HALF else spec.data_width
        shared = QuantizationGrid(lo, hi, width)

    tensors = {}
    for name, values in model.arrays.items():
        tensor, widened = quantize_tensor(name, values, spec, shared)
        if widened:
            metadata[f"grid_widened:{name}"] = str(CONSTANT_GRID_EPSILON)
        tensors[name] = tensor
    return ModelBundle(layers=model.layers, tensors=tensors, metadata=metadata)


def dequantize(tensor: QuantizedTensor, sanitize: bool = False) -> np.ndarray:
    """Decode a quantized tensor back to real values.

    Parity-wrapped words with odd parity decode to 0.0 (weight nulling).
    Corrupted ieee-half words may decode to infinity or NaN; these
    propagate unless sanitize replaces them with 0.0.
    """
    words = tensor.words()
    spec = tensor.spec
    if spec.kind is CodecKind.IEEE_HALF:
        values = _half_value_table()[words.astype(np.int64)]
        if sanitize:
            values = np.where(np.isfinite(values), values, 0.0)
        return values.reshape(tensor.shape)

    if spec.parity:
        bad = (_popcount(words) & 1).astype(bool)
        data = (words & np.uint64((1 << spec.data_width) - 1)).astype(np.int64)
    else:
        bad = None
        data = words.astype(np.int64)

    if spec.data_width <= _TABLE_WIDTH_LIMIT:
        indices = _rank_table(spec.kind, spec.data_width)[data]
    else:
        base = CodecSpec(spec.kind, spec.data_width)
        indices = np.array(
            [word_to_index(base, BitWord(spec.data_width, int(w))) for w in data],
            dtype=np.int64,
        )
    values = _reconstruct_array(indices, tensor.grid)
    if bad is not None:
        values = np.where(bad, 0.0, values)
    return values.reshape(tensor.shape)


def dequantize_bundle(bundle: ModelBundle, sanitize: bool = False) -> dict[str, np.ndarray]:
    return {name: dequantize(t, sanitize) for name, t in bundle.tensors.items()}


def requantize(bundle: ModelBundle, spec: CodecSpec) -> ModelBundle:
    """Re-encode a bundle's decoded values under a different codec.

    Grid bounds are kept from the source tensors (only the resolution
    changes), so e.g. a 16-bit plain bundle converts to a 15-data-bit
    parity bundle at equal stored bits per weight.
    """
    tensors = {}
    for name, t in bundle.tensors.items():
        values = dequantize(t)
        width = 16 if spec.kind is CodecKind.IEEE_HALF else spec.data_width
        grid = QuantizationGrid(t.grid.w_min, t.grid.w_max, width)
        tensor, _ = quantize_tensor(name, values, spec, grid)
        tensors[name] = tensor
    metadata = dict(bundle.metadata)
    metadata["codec"] = spec.kind.value
    metadata["q"] = str(spec.q)
    metadata["parity"] = "1" if spec.parity else "0"
    return ModelBundle(layers=bundle.layers, tensors=tensors, metadata=metadata)


# --- serialization ---------------------------------------------------------


class _Writer:
    def __init__(self):
        self.buf = bytearray()

    def raw(self, b: bytes):
        self.buf += b

    def u8(self, v: int):
        self.buf += struct.pack("<B", v)

    def u16(self, v: int):
        self.buf += struct.pack("<H", v)

    def u32(self, v: int):
        self.buf += struct.pack("<I", v)

    def f64(self, v: float):
        self.buf += struct.pack("<d", v)

    def string(self, s: str):
        data = s.encode("utf-8")
        if len(data) > 0xFFFF:
            raise ValueError(f"string too long to serialize ({len(data)} bytes)")
        self.u16(len(data))
        self.raw(data)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise BundleFormatError(
                f"truncated bundle: wanted {n} bytes at offset {self.pos}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def string(self) -> str:
        return self.take(self.u16()).decode("utf-8")


def _write_layer(w: _Writer, layer: Layer):
    if isinstance(layer, Dense):
        w.u8(0)
        w.string(layer.weights)
        w.string(layer.bias)
    elif isinstance(layer, Conv2D):
        w.u8(1)
        w.string(layer.kernels)
        w.string(layer.bias)
    elif isinstance(layer, MaxPool2D):
        w.u8(2)
        w.u8(layer.window[0])
        w.u8(layer.window[1])
    elif isinstance(layer, Activation):
        w.u8(3)
        w.u8(_ACTIVATIONS.index(layer.fn))
    elif isinstance(layer, Flatten):
        w.u8(4)
    elif isinstance(layer, Softmax):
        w.u8(5)
    else:
        raise ValueError(f"unknown layer type {type(layer).__name__}")


def _read_layer(r: _Reader) -> Layer:
    kind = r.u8()
    if kind == 0:
        return Dense(r.string(), r.string())
    if kind == 1:
        return Conv2D(r.string(), r.string())
    if kind == 2:
        return MaxPool2D((r.u8(), r.u8()))
    if kind == 3:
        fn = r.u8()
        if fn >= len(_ACTIVATIONS):
            raise BundleFormatError(f"unknown activation id {fn}")
        return Activation(_ACTIVATIONS[fn])
    if kind == 4:
        return Flatten()
    if kind == 5:
        return Softmax()
    raise BundleFormatError(f"unknown layer id {kind}")


def bundle_to_bytes(bundle: ModelBundle) -> bytes:
    w = _Writer()
    w.raw(MAGIC)
    w.u16(VERSION)
    w.u32(len(bundle.layers))
    for layer in bundle.layers:
        _write_layer(w, layer)
    w.u32(len(bundle.tensors))
    for name, t in bundle.tensors.items():
        w.string(name)
        w.u8(_CODEC_IDS[t.spec.kind])
        w.u8(t.spec.q)
        w.u8(1 if t.spec.parity else 0)
        w.f64(t.grid.w_min)
        w.f64(t.grid.w_max)
        if len(t.shape) > 255:
            raise ValueError("tensor rank exceeds format limit")
        w.u8(len(t.shape))
        for d in t.shape:
            w.u32(d)
        w.raw(t.packed.tobytes())
    w.u32(len(bundle.metadata))
    for key in sorted(bundle.metadata):
        w.string(key)
        w.string(bundle.metadata[key])
    w.u32(zlib.crc32(bytes(w.buf)) & 0xFFFFFFFF)
    return bytes(w.buf)


def bundle_from_bytes(data: bytes) -> ModelBundle:
    if len(data) < len(MAGIC) + 2 + 4:
        raise BundleFormatError("file too short to be a bundle")
    if data[: len(MAGIC)] != MAGIC:
        raise BundleFormatError(f"bad magic {data[:4]!r}")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    actual_crc = zlib.crc32(data[:-4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise BundleFormatError(
            f"checksum mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}"
        )
    r = _Reader(data[: len(data) - 4])
    r.take(len(MAGIC))
    version = r.u16()
    if version != VERSION:
        raise BundleFormatError(f"unsupported bundle version {version}")
    layers = tuple(_read_layer(r) for _ in range(r.u32()))
    tensors = {}
    for _ in range(r.u32()):
        name = r.string()
        codec_id = r.u8()
        if codec_id not in _CODEC_BY_ID:
            raise BundleFormatError(f"unknown codec id {codec_id}")
        q = r.u8()
        parity = r.u8()
        if parity not in (0, 1):
            raise BundleFormatError(f"bad parity flag {parity}")
        spec = CodecSpec(_CODEC_BY_ID[codec_id], q, bool(parity))
        w_min = r.f64()
        w_max = r.f64()
        rank = r.u8()
        shape = tuple(r.u32() for _ in range(rank))
        width = 16 if spec.kind is CodecKind.IEEE_HALF else spec.data_width
        grid = QuantizationGrid(w_min, w_max, width)
        count = math.prod(shape)
        nbytes = (count * q + 7) // 8
        packed = np.frombuffer(r.take(nbytes), dtype=np.uint8)
        tensors[name] = QuantizedTensor(name, shape, grid, spec, packed)
    metadata = {}
    for _ in range(r.u32()):
        key = r.string()
        metadata[key] = r.string()
    if r.pos != len(r.data):
        raise BundleFormatError(f"{len(r.data) - r.pos} trailing bytes after metadata")
    return ModelBundle(layers=layers, tensors=tensors, metadata=metadata)


def save_bundle(bundle: ModelBundle, path: str | Path):
    Path(path).write_bytes(bundle_to_bytes(bundle))


def load_bundle(path: str | Path) -> ModelBundle:
    return bundle_from_bytes(Path(path).read_bytes())


# --- dataset fixtures -------------------------------------------------------


def save_dataset(dataset: LabeledDataset, path: str | Path):
    """Flat binary fixture: u32 count, u32 dims, f32 features, u16 labels."""
    inputs = np.ascontiguousarray(dataset.inputs, dtype=np.float32)
    flat = inputs.reshape(len(dataset), -1)
    if dataset.labels.size and dataset.labels.max() > 0xFFFF:
        raise ValueError("labels exceed u16 range")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", flat.shape[0], flat.shape[1]))
        fh.write(flat.astype("<f4").tobytes())
        fh.write(dataset.labels.astype("<u2").tobytes())


def load_dataset(path: str | Path) -> LabeledDataset:
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise BundleFormatError("dataset file too short")
    count, dims = struct.unpack("<II", data[:8])
    need = 8 + count * dims * 4 + count * 2
    if len(data) != need:
        raise BundleFormatError(
            f"dataset file is {len(data)} bytes, expected {need} for {count}x{dims}"
        )
    feats = np.frombuffer(data, dtype="<f4", count=count * dims, offset=8)
    labels = np.frombuffer(data, dtype="<u2", count=count, offset=8 + count * dims * 4)
    return LabeledDataset(
        feats.reshape(count, dims).astype(np.float32), labels.astype(np.int64)
    )
