"""Feedforward inference over quantized bundles, plus a toy trainer.

The engine decodes a bundle's tensors once and applies its layers in
order over a batch: dense, 2-D convolution (valid padding, stride 1,
channels-last), max pooling, relu/sigmoid, flatten, and a numerically
stable softmax.  Corrupted weights flow through as-is; non-finite values
produced by decoding propagate unless dequantization is asked to
sanitize.

train_toy fits a one-hidden-layer dense classifier to synthetic Gaussian
blobs by full-batch gradient descent, giving the test suite and demos a
self-contained model whose quantized forms behave like a real network
under bit errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import (
    Activation,
    Conv2D,
    Dense,
    Flatten,
    LabeledDataset,
    Layer,
    MaxPool2D,
    ModelBundle,
    RealModel,
    Softmax,
    dequantize_bundle,
)

DEFAULT_EVAL_BATCH = 256


class ShapeError(ValueError):
    """Input/layer shape mismatch, reported with the failing layer index."""


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; rows sum to 1."""
    logits = np.asarray(logits, dtype=np.float64)
    with np.errstate(invalid="ignore", over="ignore"):
        shifted = logits - np.max(logits, axis=-1, keepdims=True)
        e = np.exp(shifted)
        return e / np.sum(e, axis=-1, keepdims=True)


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def _conv2d_valid(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    # x: (n, h, w, c); kernels: (kh, kw, c, o)
    kh, kw = kernels.shape[0], kernels.shape[1]
    windows = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(1, 2))
    # windows: (n, h-kh+1, w-kw+1, c, kh, kw)
    out = np.einsum("nijcxy,xyco->nijo", windows, kernels, optimize=True)
    return out + bias


def _apply_layer(
    idx: int, layer: Layer, x: np.ndarray, weights: dict[str, np.ndarray]
) -> np.ndarray:
    if isinstance(layer, Dense):
        w = weights[layer.weights]
        b = weights[layer.bias]
        if x.ndim != 2 or x.shape[1] != w.shape[0]:
            raise ShapeError(
                f"layer {idx} (dense): input {x.shape[1:]} does not match weights {w.shape}"
            )
        return x @ w + b
    if isinstance(layer, Conv2D):
        k = weights[layer.kernels]
        b = weights[layer.bias]
        if x.ndim != 4 or x.shape[3] != k.shape[2]:
            raise ShapeError(
                f"layer {idx} (conv2d): input {x.shape[1:]} does not match kernels {k.shape}"
            )
        if x.shape[1] < k.shape[0] or x.shape[2] < k.shape[1]:
            raise ShapeError(
                f"layer {idx} (conv2d): input {x.shape[1:]} smaller than kernel {k.shape[:2]}"
            )
        return _conv2d_valid(x, k, b)
    if isinstance(layer, MaxPool2D):
        if x.ndim != 4:
            raise ShapeError(f"layer {idx} (maxpool2d): expected 4-d input, got {x.shape}")
        ph, pw = layer.window
        n, h, w, c = x.shape
        if h < ph or w < pw:
            raise ShapeError(f"layer {idx} (maxpool2d): input {x.shape[1:]} too small")
        x = x[:, : h - h % ph, : w - w % pw, :]
        x = x.reshape(n, h // ph, ph, w // pw, pw, c)
        return x.max(axis=(2, 4))
    if isinstance(layer, Activation):
        return _relu(x) if layer.fn == "relu" else _sigmoid(x)
    if isinstance(layer, Flatten):
        return x.reshape(x.shape[0], -1)
    if isinstance(layer, Softmax):
        return softmax(x)
    raise ShapeError(f"layer {idx}: unknown layer type {type(layer).__name__}")


def _forward_batch(
    layers: tuple[Layer, ...], weights: dict[str, np.ndarray], x: np.ndarray
) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    for idx, layer in enumerate(layers):
        x = _apply_layer(idx, layer, x, weights)
    return x


def _batched_input(bundle: ModelBundle, x: np.ndarray) -> np.ndarray:
    """Reshape flat batch rows to the bundle's declared input shape, if any."""
    shape_meta = bundle.metadata.get("input_shape")
    if shape_meta and x.ndim == 2:
        shape = tuple(int(d) for d in shape_meta.split(","))
        if int(np.prod(shape)) == x.shape[1]:
            return x.reshape((x.shape[0],) + shape)
    return x


def forward(bundle: ModelBundle, x: np.ndarray, sanitize: bool = False) -> np.ndarray:
    """Output of the network for a single input tensor."""
    weights = dequantize_bundle(bundle, sanitize)
    xb = np.asarray(x, dtype=np.float64)[None, ...]
    xb = _batched_input(bundle, xb.reshape(1, -1)) if xb.ndim == 2 else xb
    return _forward_batch(bundle.layers, weights, xb)[0]


def top_k_hits(probs: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Whether each true label ranks among the k largest outputs.

    Ties and NaN scores resolve deterministically: stable sort on
    descending score prefers the lowest class index, and NaN scores
    always rank last.
    """
    order = np.argsort(-probs, axis=1, kind="stable")[:, :k]
    return (order == labels[:, None]).any(axis=1)


def evaluate_accuracy(
    bundle: ModelBundle,
    dataset: LabeledDataset,
    k: int = 1,
    sanitize: bool = False,
    batch: int = DEFAULT_EVAL_BATCH,
) -> float:
    """Fraction of samples whose true label is in the top-k outputs."""
    if k < 1:
        raise ValueError(f"top-k must be >= 1, got {k}")
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    weights = dequantize_bundle(bundle, sanitize)
    inputs = np.asarray(dataset.inputs, dtype=np.float64)
    if inputs.ndim == 1:
        inputs = inputs[:, None]
    inputs = _batched_input(bundle, inputs) if inputs.ndim == 2 else inputs
    hits = 0
    for start in range(0, len(dataset), batch):
        xb = inputs[start : start + batch]
        yb = dataset.labels[start : start + batch]
        probs = _forward_batch(bundle.layers, weights, xb)
        hits += int(top_k_hits(probs, yb, k).sum())
    return hits / len(dataset)


# --- toy training -----------------------------------------------------------


@dataclass(frozen=True)
class ToyConfig:
    """Synthetic Gaussian-blob classification task and its MLP trainer."""

    classes: int = 5
    dims: int = 32
    samples: int = 2000
    hidden: int = 256
    epochs: int = 300
    seed: int = 0
    learning_rate: float = 0.2
    weight_decay: float = 5e-3
    center_scale: float = 1.2
    holdout_fraction: float = 0.25

    def __post_init__(self):
        if self.classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.classes}")
        if min(self.dims, self.samples, self.hidden, self.epochs) < 1:
            raise ValueError("dims, samples, hidden, and epochs must be positive")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ValueError("holdout_fraction must be in (0, 1)")


def make_blobs(config: ToyConfig, rng: np.random.Generator) -> LabeledDataset:
    centers = rng.normal(size=(config.classes, config.dims)) * config.center_scale
    labels = rng.integers(0, config.classes, size=config.samples)
    inputs = centers[labels] + rng.normal(size=(config.samples, config.dims))
    return LabeledDataset(inputs, labels)


def toy_loss_and_grads(
    params: dict[str, np.ndarray], inputs: np.ndarray, labels: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Cross-entropy loss and analytic gradients of the toy MLP."""
    w1, b1, w2, b2 = params["w1"], params["b1"], params["w2"], params["b2"]
    n = inputs.shape[0]
    z1 = inputs @ w1 + b1
    a1 = _relu(z1)
    z2 = a1 @ w2 + b2
    probs = softmax(z2)
    eps = 1e-300  # guards log(0); irrelevant to the gradient
    loss = float(-np.mean(np.log(probs[np.arange(n), labels] + eps)))
    dz2 = probs.copy()
    dz2[np.arange(n), labels] -= 1.0
    dz2 /= n
    grads = {
        "w2": a1.T @ dz2,
        "b2": dz2.sum(axis=0),
    }
    da1 = dz2 @ w2.T
    dz1 = da1 * (z1 > 0)
    grads["w1"] = inputs.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    return loss, grads


def train_toy(config: ToyConfig = ToyConfig()) -> tuple[RealModel, LabeledDataset]:
    """Train the toy MLP; returns the model and its held-out dataset.

    Deterministic for a given seed.  Raises if the loss diverges to NaN.
    """
    rng = np.random.default_rng(config.seed)
    data = make_blobs(config, rng)
    n_hold = max(1, int(round(len(data) * config.holdout_fraction)))
    train = LabeledDataset(data.inputs[n_hold:], data.labels[n_hold:])
    heldout = LabeledDataset(data.inputs[:n_hold], data.labels[:n_hold])

    params = {
        "w1": rng.normal(size=(config.dims, config.hidden)) * np.sqrt(2.0 / config.dims),
        "b1": np.zeros(config.hidden),
        "w2": rng.normal(size=(config.hidden, config.classes))
        * np.sqrt(2.0 / config.hidden),
        "b2": np.zeros(config.classes),
    }
    loss = np.nan
    for epoch in range(config.epochs):
        loss, grads = toy_loss_and_grads(params, train.inputs, train.labels)
        if not np.isfinite(loss):
            raise RuntimeError(
                f"training diverged at epoch {epoch}: loss={loss!r}, "
                f"lr={config.learning_rate}, seed={config.seed}"
            )
        for key in params:
            g = grads[key]
            if key.startswith("w"):  # decay weight matrices, not biases
                g = g + config.weight_decay * params[key]
            params[key] = params[key] - config.learning_rate * g

    model = RealModel(
        layers=(
            Dense("fc1.w", "fc1.b"),
            Activation("relu"),
            Dense("fc2.w", "fc2.b"),
            Softmax(),
        ),
        arrays={
            "fc1.w": params["w1"],
            "fc1.b": params["b1"],
            "fc2.w": params["w2"],
            "fc2.b": params["b2"],
        },
        metadata={
            "task": "gaussian-blobs",
            "seed": str(config.seed),
            "final_loss": repr(loss),
        },
    )
    return model, heldout


def evaluate_real(model: RealModel, dataset: LabeledDataset, k: int = 1) -> float:
    """Accuracy of an unquantized real model (reference for loss budgets)."""
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    inputs = np.asarray(dataset.inputs, dtype=np.float64)
    probs = _forward_batch(model.layers, model.arrays, inputs)
    return float(top_k_hits(probs, dataset.labels, k).mean())
