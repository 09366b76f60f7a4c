#!/usr/bin/env python3
"""End-to-end robustness experiment on the built-in toy classifier.

Trains the blob MLP, stores it as a 16-bit binary-expansion bundle,
passes it through the binary symmetric channel over a grid of raw
bit-error rates with independent trials, and reports box statistics and
the robustness measure R(x).  Writes sweep.csv / sweep.json next to the
script for the plotting tools.
"""

from pathlib import Path

from nnsb import (
    CodecKind,
    CodecSpec,
    SweepConfig,
    ToyConfig,
    evaluate_accuracy,
    evaluate_real,
    quantize_model,
    robustness,
    run_sweep,
    train_toy,
    write_sweep,
)

print("training the toy classifier (gaussian blobs, one hidden layer)...")
model, heldout = train_toy(ToyConfig(seed=0))
clean = evaluate_real(model, heldout)
print(f"held-out accuracy, float weights: {clean:.4f}")

bundle = quantize_model(model, CodecSpec(CodecKind.BINARY_EXPANSION, 16), "global")
stored = evaluate_accuracy(bundle, heldout)
print(f"held-out accuracy, 16-bit stored weights: {stored:.4f} "
      f"(quantization loss {clean - stored:+.4f})")
print(f"bundle: {bundle.total_weights} weights, {bundle.total_bits} bits\n")

config = SweepConfig(
    rber_grid=(0.0, 0.001, 0.002, 0.003, 0.005, 0.008, 0.0125, 0.02, 0.03, 0.05),
    trials=20,
    master_seed=2024,
)
print(f"sweeping {len(config.rber_grid)} error rates x {config.trials} trials...")
result = run_sweep(bundle, heldout, config)

print(f"\n{'rber':>8} | {'mean':>7} {'median':>7} {'q1':>7} {'q3':>7} "
      f"{'whiskers':>17} {'outliers':>8} | {'flips':>6}")
for pt in result.points:
    b = pt.box
    print(f"{pt.rber:8.4f} | {b.mean:7.4f} {b.median:7.4f} {b.q1:7.4f} {b.q3:7.4f} "
          f"[{b.whisker_low:7.4f},{b.whisker_high:7.4f}] {len(b.outliers):8d} "
          f"| {max(pt.flips):6d}")

r = robustness(result, 0.95)
print(f"\nbaseline A = {result.baseline_accuracy:.4f}")
print(f"R(0.95) = {r}  (largest rber with mean accuracy >= {0.95 * result.baseline_accuracy:.4f})")

out = Path(__file__).with_name("sweep.csv")
write_sweep(result, out)
print(f"wrote {out} and {out.with_suffix('.json')}")
