#!/usr/bin/env python3
"""Regenerate the shared format-conformance and comparison fixtures.

Run from the repository root with the package installed. Everything here
is deterministic, so regeneration is byte-identical.

- golden_*.nnsb + golden_*.weights.json: small models serialized by the
  library; any other writer of the format must reproduce these bytes
  from the listed float64 values.
- sweep_binary.csv/json + sweep_hamming.csv/json: low-rate accuracy
  sweeps of the toy classifier under the two index codecs, used by the
  plotting tools and the codec-comparison checks.
"""

import json
from pathlib import Path

import numpy as np

from nnsb import (
    Activation,
    CodecKind,
    CodecSpec,
    Conv2D,
    Dense,
    Flatten,
    MaxPool2D,
    RealModel,
    Softmax,
    SweepConfig,
    ToyConfig,
    quantize_model,
    run_sweep,
    save_bundle,
    train_toy,
    write_sweep,
)

HERE = Path(__file__).parent


def layer_doc(layer):
    if isinstance(layer, Dense):
        return {"kind": "dense", "weights": layer.weights, "bias": layer.bias}
    if isinstance(layer, Conv2D):
        return {"kind": "conv2d", "kernels": layer.kernels, "bias": layer.bias}
    if isinstance(layer, MaxPool2D):
        return {"kind": "maxpool2d", "window": list(layer.window)}
    if isinstance(layer, Activation):
        return {"kind": "activation", "fn": layer.fn}
    if isinstance(layer, Flatten):
        return {"kind": "flatten"}
    return {"kind": "softmax"}


def write_golden(stem, model, spec, grid_policy):
    bundle = quantize_model(model, spec, grid_policy)
    save_bundle(bundle, HERE / f"{stem}.nnsb")
    doc = {
        "layers": [layer_doc(l) for l in model.layers],
        "tensors": [
            {"name": name, "shape": list(a.shape), "values": a.reshape(-1).tolist()}
            for name, a in model.arrays.items()
        ],
        "metadata": dict(model.metadata),
        "codec": spec.kind.value,
        "q": spec.q,
        "parity": spec.parity,
        "grid_policy": grid_policy,
    }
    (HERE / f"{stem}.weights.json").write_text(json.dumps(doc, indent=1) + "\n")
    print(f"{stem}: {len(bundle.tensors)} tensors, "
          f"{(HERE / (stem + '.nnsb')).stat().st_size} bytes")


def main():
    rng = np.random.default_rng(424242)
    small = RealModel(
        layers=(
            Conv2D("conv.k", "conv.b"),
            Activation("relu"),
            MaxPool2D((2, 2)),
            Flatten(),
            Dense("fc.w", "fc.b"),
            Softmax(),
        ),
        arrays={
            "conv.k": rng.normal(size=(2, 2, 1, 2)),
            "conv.b": rng.normal(size=2) * 0.1,
            "fc.w": rng.normal(size=(8, 3)),
            "fc.b": rng.normal(size=3) * 0.1,
        },
        metadata={"input_shape": "4,4,1", "origin": "conformance-fixture"},
    )
    write_golden("golden_binary_q16", small, CodecSpec(CodecKind.BINARY_EXPANSION, 16),
                 "per-tensor")
    write_golden("golden_hamming_parity", small,
                 CodecSpec(CodecKind.HAMMING_RANKED, 16, parity=True), "global")
    write_golden("golden_half", small, CodecSpec(CodecKind.IEEE_HALF, 16), "per-tensor")
    write_golden("golden_gray_q12", small, CodecSpec(CodecKind.GRAY_CODE, 12),
                 "per-tensor")

    model, heldout = train_toy(ToyConfig(seed=0))
    config = SweepConfig(
        rber_grid=(0.0, 0.0005, 0.001, 0.002, 0.003), trials=20, master_seed=777
    )
    for kind, stem in ((CodecKind.BINARY_EXPANSION, "sweep_binary"),
                       (CodecKind.HAMMING_RANKED, "sweep_hamming")):
        bundle = quantize_model(model, CodecSpec(kind, 16), "global")
        result = run_sweep(bundle, heldout, config)
        write_sweep(result, HERE / f"{stem}.csv")
        print(f"{stem}: baseline {result.baseline_accuracy}")


if __name__ == "__main__":
    main()
