"""Bit-level weight storage codecs, storage-media fault injection, and
inference robustness measurement for quantized neural networks."""

from .bundle import (
    Activation,
    BundleFormatError,
    Conv2D,
    Dense,
    Flatten,
    LabeledDataset,
    MaxPool2D,
    ModelBundle,
    QuantizedTensor,
    RealModel,
    Softmax,
    dequantize,
    dequantize_bundle,
    load_bundle,
    load_dataset,
    pack_words,
    quantize_model,
    quantize_tensor,
    requantize,
    save_bundle,
    save_dataset,
    unpack_words,
)
from .channel import (
    BscChannel,
    InjectionTarget,
    corrupt_bits,
    corrupt_bundle,
    derive_stream_seed,
)
from .codec import (
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
from .distortion import (
    DistortionReport,
    Exhaustive,
    Sampled,
    distortion_profile,
    hamming_ranked_bound,
    pair_distortion,
)
from .engine import (
    ShapeError,
    ToyConfig,
    evaluate_accuracy,
    evaluate_real,
    forward,
    make_blobs,
    softmax,
    top_k_hits,
    toy_loss_and_grads,
    train_toy,
)
from .harness import (
    BoxStats,
    SweepConfig,
    SweepPoint,
    SweepResult,
    box_stats,
    robustness,
    run_sweep,
    sweep_result_from_means,
    sweep_to_csv,
    sweep_to_json,
    write_sweep,
)
from .nulling import parity_decode, parity_encode

__version__ = "0.1.0"
