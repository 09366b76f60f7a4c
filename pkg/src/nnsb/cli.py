"""Command-line front end.

Subcommands mirror the library: quantize / info / eval for bundles,
corrupt for single-shot fault injection, sweep for full robustness
experiments, distortion for codec distortion tables.

quantize consumes a real-valued model given as a .npz of named arrays
plus a JSON architecture file:

    {"layers": [{"kind": "dense", "weights": "fc1.w", "bias": "fc1.b"},
                {"kind": "activation", "fn": "relu"},
                {"kind": "softmax"}],
     "metadata": {"input_shape": "28,28,1"}}
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bundle import (
    Activation,
    Conv2D,
    Dense,
    Flatten,
    MaxPool2D,
    RealModel,
    Softmax,
    load_bundle,
    load_dataset,
    requantize,
    save_bundle,
)
from .channel import BscChannel, InjectionTarget, corrupt_bundle
from .codec import CodecKind, CodecSpec
from .distortion import Exhaustive, Sampled, distortion_profile
from .engine import evaluate_accuracy
from .harness import SweepConfig, robustness, run_sweep, write_sweep

_CODEC_NAMES = {k.value: k for k in CodecKind}


def _parse_layers(doc: dict) -> tuple:
    layers = []
    for entry in doc["layers"]:
        kind = entry["kind"]
        if kind == "dense":
            layers.append(Dense(entry["weights"], entry["bias"]))
        elif kind == "conv2d":
            layers.append(Conv2D(entry["kernels"], entry["bias"]))
        elif kind == "maxpool2d":
            layers.append(MaxPool2D(tuple(entry.get("window", (2, 2)))))
        elif kind == "activation":
            layers.append(Activation(entry["fn"]))
        elif kind == "flatten":
            layers.append(Flatten())
        elif kind == "softmax":
            layers.append(Softmax())
        else:
            raise ValueError(f"unknown layer kind {kind!r} in architecture file")
    return tuple(layers)


def _codec_spec(args) -> CodecSpec:
    kind = _CODEC_NAMES[args.codec]
    return CodecSpec(kind, args.q, getattr(args, "parity", False))


def _cmd_quantize(args) -> int:
    from .bundle import quantize_model

    arch = json.loads(Path(args.arch).read_text())
    with np.load(args.weights) as npz:
        arrays = {name: npz[name] for name in npz.files}
    model = RealModel(
        layers=_parse_layers(arch),
        arrays=arrays,
        metadata={str(k): str(v) for k, v in arch.get("metadata", {}).items()},
    )
    bundle = quantize_model(model, _codec_spec(args), args.grid_policy)
    save_bundle(bundle, args.out)
    print(
        f"wrote {args.out}: {len(bundle.layers)} layers, "
        f"{len(bundle.tensors)} tensors, {bundle.total_weights} weights, "
        f"{bundle.total_bits} stored bits"
    )
    return 0


def _cmd_info(args) -> int:
    bundle = load_bundle(args.bundle)
    print(f"{args.bundle}: NNSB v1, {len(bundle.layers)} layers")
    for i, layer in enumerate(bundle.layers):
        print(f"  layer {i}: {layer}")
    print(f"tensors ({len(bundle.tensors)}):")
    for name, t in bundle.tensors.items():
        parity = " +parity" if t.spec.parity else ""
        print(
            f"  {name}: shape {t.shape}, codec {t.spec.kind.value} q={t.spec.q}{parity}, "
            f"grid [{t.grid.w_min:.6g}, {t.grid.w_max:.6g}]"
        )
    if bundle.metadata:
        print("metadata:")
        for key in sorted(bundle.metadata):
            print(f"  {key} = {bundle.metadata[key]}")
    return 0


def _cmd_eval(args) -> int:
    bundle = load_bundle(args.bundle)
    dataset = load_dataset(args.data)
    acc = evaluate_accuracy(bundle, dataset, args.top_k, sanitize=args.sanitize)
    print(f"accuracy: {acc!r} ({len(dataset)} samples, top-{args.top_k})")
    return 0


def _cmd_corrupt(args) -> int:
    bundle = load_bundle(args.infile)
    channel = BscChannel(args.rber, args.seed)
    names = frozenset(args.tensors.split(",")) if args.tensors else None
    corrupted, flips = corrupt_bundle(
        bundle, channel, InjectionTarget(names, args.trial)
    )
    save_bundle(corrupted, args.outfile)
    print(f"wrote {args.outfile}: {flips} of {bundle.total_bits} bits flipped")
    return 0


def _cmd_sweep(args) -> int:
    bundle = load_bundle(args.bundle)
    dataset = load_dataset(args.data)
    grid = tuple(float(tok) for tok in args.rber_grid.split(","))
    names = frozenset(args.tensors.split(",")) if args.tensors else None
    config = SweepConfig(
        rber_grid=grid,
        trials=args.trials,
        master_seed=args.seed,
        top_k=args.top_k,
        tensor_filter=names,
        x=args.x,
    )
    result = run_sweep(bundle, dataset, config)
    write_sweep(result, args.out, args.json)
    r = robustness(result)
    print(
        f"baseline accuracy {result.baseline_accuracy!r}; "
        f"R({args.x}) = {r if r is not None else 'undefined'}"
    )
    if args.parity_compare:
        spec = bundle.tensors[next(iter(bundle.tensors))].spec
        if spec.parity:
            raise SystemExit("--parity-compare needs a non-parity input bundle")
        pspec = CodecSpec(spec.kind, spec.q, parity=True)
        presult = run_sweep(requantize(bundle, pspec), dataset, config)
        out = Path(args.out)
        pcsv = out.with_name(out.stem + ".parity" + out.suffix)
        write_sweep(presult, pcsv, None)
        pr = robustness(presult)
        print(
            f"parity variant baseline {presult.baseline_accuracy!r}; "
            f"R({args.x}) = {pr if pr is not None else 'undefined'} -> {pcsv}"
        )
    return 0


def _cmd_distortion(args) -> int:
    rows = ["codec,q,k,mode,value_exact_num,value_exact_den,value_float,method,samples,seed"]
    if args.samples:
        method = Sampled(args.samples, args.seed)
        method_name, samples, seed = "sampled", str(args.samples), str(args.seed)
    else:
        method = Exhaustive()
        method_name, samples, seed = "exhaustive", "", ""
    for codec in args.codec.split(","):
        spec = CodecSpec(_CODEC_NAMES[codec], args.q)
        report = distortion_profile(spec, args.k, method, shell_only=args.shell)
        modes = ("max", "ave") if args.mode == "both" else (args.mode,)
        for mode in modes:
            value = report.d_max if mode == "max" else report.d_ave
            rows.append(
                f"{codec},{args.q},{args.k},{mode},{value.numerator},"
                f"{value.denominator},{float(value)!r},{method_name},{samples},{seed}"
            )
    text = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nnsb",
        description="Quantized-weight storage codecs and bit-error robustness tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quantize", help="encode a real-valued model into a bundle")
    p.add_argument("--weights", required=True, help=".npz of named arrays")
    p.add_argument("--arch", required=True, help="architecture JSON")
    p.add_argument("--codec", choices=["binary", "gray", "hamming", "half"], default="binary")
    p.add_argument("--q", type=int, default=16)
    p.add_argument("--parity", action="store_true", help="reserve one bit as parity check")
    p.add_argument("--grid-policy", choices=["per-tensor", "global"], default="per-tensor")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(fn=_cmd_quantize)

    p = sub.add_parser("info", help="describe a bundle")
    p.add_argument("bundle")
    p.set_defaults(fn=_cmd_info)

    p = sub.add_parser("eval", help="accuracy of a bundle on a dataset")
    p.add_argument("--bundle", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--top-k", type=int, default=1)
    p.add_argument("--sanitize", action="store_true", help="zero non-finite decoded weights")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("corrupt", help="pass a bundle through the error channel once")
    p.add_argument("--rber", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--tensors", help="comma-separated tensor filter")
    p.add_argument("infile")
    p.add_argument("outfile")
    p.set_defaults(fn=_cmd_corrupt)

    p = sub.add_parser("sweep", help="accuracy sweep over an rber grid")
    p.add_argument("--bundle", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--rber-grid", required=True, help="comma-separated ascending rates")
    p.add_argument("--trials", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--top-k", type=int, default=1)
    p.add_argument("--x", type=float, default=0.95)
    p.add_argument("--tensors", help="comma-separated tensor filter")
    p.add_argument(
        "--parity-compare",
        action="store_true",
        help="also sweep an equal-stored-bits parity variant",
    )
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--json", help="JSON mirror path (default: CSV path with .json)")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("distortion", help="codec distortion profile as CSV")
    p.add_argument("--codec", default="binary,gray,hamming", help="comma-separated codecs")
    p.add_argument("--q", type=int, default=8)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--mode", choices=["max", "ave", "both"], default="both")
    p.add_argument("--shell", action="store_true", help="exact-distance shell, not the ball")
    p.add_argument("--samples", type=int, help="sampled estimation instead of exhaustive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out")
    p.set_defaults(fn=_cmd_distortion)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
