/** Acceptance checks for the trainer/exporter/plotter component.
 *
 * The full MNIST training run takes tens of minutes on one core, so the
 * accuracy-gate checks read the artifacts of a completed run from
 * runs/mnist (regenerate with `npm run train-mnist -- --out-dir
 * runs/mnist`); everything else runs from scratch.  Checks that consume
 * the core `nnsb` CLI skip with a reason when it is not on PATH.
 */

import { execFileSync, spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, test } from "vitest";

import { loadSweep } from "../src/csv.js";
import { saveDataset } from "../src/datafix.js";
import { exportToFile } from "../src/export.js";
import { MnistUnavailableError, loadMnist } from "../src/mnist.js";
import { PARAM_DEFS, parameterCounts } from "../src/model.js";
import { bundleFromBytes } from "../src/nnsb.js";
import { renderCurves } from "../src/plot.js";
import { trainMnist } from "../src/train.js";
import { NamedTensor, saveWeightsFile } from "../src/weights.js";

const __dirname = path.dirname(fileURLToPath(import.meta.url));
const ROOT = path.join(__dirname, "..");
const FIXTURES = path.join(ROOT, "..", "fixtures");
const RUN_DIR = path.join(ROOT, "runs", "mnist");

function tmpdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "nnsb-frontend-"));
}

function primaryCliAvailable(): boolean {
  const probe = spawnSync("nnsb", ["--help"], { encoding: "utf-8" });
  return probe.status === 0;
}

describe("criterion: reference architecture", () => {
  test("per-layer parameter counts match the published table exactly", () => {
    expect(parameterCounts()).toEqual([320, 9248, 18496, 36928, 262400, 2570]);
  });
});

describe("criterion: trained accuracy gate", () => {
  const manifestPath = path.join(RUN_DIR, "manifest.json");

  test.skipIf(!fs.existsSync(manifestPath))(
    "completed training run reached >= 0.98 test accuracy",
    () => {
      const manifest = JSON.parse(fs.readFileSync(manifestPath, "utf-8"));
      expect(manifest.metadata.parameter_counts).toBe("320/9248/18496/36928/262400/2570");
      const acc = Number(manifest.metadata.test_accuracy);
      expect(acc).toBeGreaterThanOrEqual(0.98);
    },
  );

});

describe("criterion: export to the bundle format", () => {
  test("export sets the per-tensor parity flag", () => {
    const { weights, dir } = makeSyntheticRun();
    const out = path.join(dir, "parity.nnsb");
    exportToFile(weights, path.join(dir, "manifest.json"), out, {
      codec: "binary",
      q: 16,
      parity: true,
      gridPolicy: "per-tensor",
    });
    const bundle = bundleFromBytes(fs.readFileSync(out));
    expect(bundle.tensors.length).toBe(PARAM_DEFS.length);
    for (const t of bundle.tensors) expect(t.parity).toBe(true);
    expect(bundle.metadata.parity).toBe("1");
  });

  test("re-export of identical weights is byte-identical", () => {
    const { weights, dir } = makeSyntheticRun();
    const manifest = path.join(dir, "manifest.json");
    const a = path.join(dir, "a.nnsb");
    const b = path.join(dir, "b.nnsb");
    const opts = { codec: "binary" as const, q: 16, parity: false, gridPolicy: "per-tensor" as const };
    exportToFile(weights, manifest, a, opts);
    exportToFile(weights, manifest, b, opts);
    expect(Buffer.compare(fs.readFileSync(a), fs.readFileSync(b))).toBe(0);
  });

  test.skipIf(!fs.existsSync(path.join(RUN_DIR, "weights.bin")) || !primaryCliAvailable())(
    "core engine reproduces the trained accuracy within 0.002 at q=16",
    () => {
      let data;
      try {
        data = loadMnist();
      } catch (err) {
        if (err instanceof MnistUnavailableError) return;
        throw err;
      }
      const dir = tmpdir();
      const bundlePath = path.join(dir, "mnist.nnsb");
      exportToFile(
        path.join(RUN_DIR, "weights.bin"),
        path.join(RUN_DIR, "manifest.json"),
        bundlePath,
        { codec: "binary", q: 16, parity: false, gridPolicy: "per-tensor" },
      );
      const dataPath = path.join(dir, "test.bin");
      saveDataset(dataPath, data.test.images, data.test.labels, 784);
      const out = execFileSync(
        "nnsb",
        ["eval", "--bundle", bundlePath, "--data", dataPath],
        { encoding: "utf-8" },
      );
      const evalAcc = Number(out.split("accuracy: ")[1].split(" ")[0]);
      const manifest = JSON.parse(
        fs.readFileSync(path.join(RUN_DIR, "manifest.json"), "utf-8"),
      );
      const trainedAcc = Number(manifest.metadata.test_accuracy);
      expect(Math.abs(evalAcc - trainedAcc)).toBeLessThanOrEqual(0.002);
    },
    600_000,
  );
});

describe("criterion: training determinism", () => {
  test("same seed and config produce identical manifest metadata", () => {
    let available = true;
    try {
      loadMnist(undefined, 1);
    } catch (err) {
      if (err instanceof MnistUnavailableError) available = false;
      else throw err;
    }
    if (!available) return;
    const run = (dir: string) =>
      trainMnist({
        outDir: dir,
        seed: 5,
        epochs: 1,
        batchSize: 32,
        learningRate: 1e-3,
        lrDecay: 1.0,
        trainSize: 128,
        valSize: 64,
        stopAt: 2,
        evalTest: false,
        resume: false,
        log: () => {},
      });
    const a = run(tmpdir());
    const b = run(tmpdir());
    const ma = fs.readFileSync(a.manifestPath, "utf-8");
    const mb = fs.readFileSync(b.manifestPath, "utf-8");
    expect(ma).toBe(mb);
    expect(
      Buffer.compare(fs.readFileSync(a.weightsPath), fs.readFileSync(b.weightsPath)),
    ).toBe(0);
  }, 240_000);
});

describe("criterion: codec comparison figure", () => {
  const binaryCsv = path.join(FIXTURES, "sweep_binary.csv");
  const hammingCsv = path.join(FIXTURES, "sweep_hamming.csv");

  test("overlaid binary vs hamming curves render from sweep CSVs", () => {
    const svg = renderCurves([loadSweep(binaryCsv), loadSweep(hammingCsv)], { x: 0.95 });
    expect((svg.match(/class="curve"/g) ?? []).length).toBe(2);
    expect(svg).toContain("sweep_binary");
    expect(svg).toContain("sweep_hamming");
    expect(svg).toContain('class="threshold"');
  });

  test("hamming mean accuracy stays within 0.01 of binary at matched rates", () => {
    const binary = loadSweep(binaryCsv);
    const hamming = loadSweep(hammingCsv);
    expect(hamming.summary.length).toBe(binary.summary.length);
    for (let i = 0; i < binary.summary.length; i++) {
      expect(hamming.summary[i].rber).toBe(binary.summary[i].rber);
      expect(hamming.summary[i].mean).toBeGreaterThanOrEqual(
        binary.summary[i].mean - 0.01,
      );
    }
  });
});

function makeSyntheticRun(): { weights: string; dir: string } {
  const dir = tmpdir();
  let state = 7;
  const rand = () => {
    state = (state * 48271) % 2147483647;
    return state / 2147483647 - 0.5;
  };
  const tensors: NamedTensor[] = PARAM_DEFS.map((def) => ({
    name: def.name,
    shape: def.shape,
    data: Float32Array.from(
      { length: def.shape.reduce((a, b) => a * b, 1) },
      () => rand() * 0.1,
    ),
  }));
  const weights = path.join(dir, "weights.bin");
  saveWeightsFile(weights, tensors);
  const manifestDoc = {
    layers: [
      { kind: "conv2d", kernels: "conv1.k", bias: "conv1.b" },
      { kind: "activation", fn: "relu" },
      { kind: "conv2d", kernels: "conv2.k", bias: "conv2.b" },
      { kind: "activation", fn: "relu" },
      { kind: "maxpool2d", window: [2, 2] },
      { kind: "conv2d", kernels: "conv3.k", bias: "conv3.b" },
      { kind: "activation", fn: "relu" },
      { kind: "conv2d", kernels: "conv4.k", bias: "conv4.b" },
      { kind: "activation", fn: "relu" },
      { kind: "maxpool2d", window: [2, 2] },
      { kind: "flatten" },
      { kind: "dense", weights: "fc1.w", bias: "fc1.b" },
      { kind: "activation", fn: "relu" },
      { kind: "dense", weights: "fc2.w", bias: "fc2.b" },
      { kind: "softmax" },
    ],
    tensors: PARAM_DEFS.map((d) => d.name),
    metadata: { input_shape: "28,28,1" },
  };
  fs.writeFileSync(path.join(dir, "manifest.json"), JSON.stringify(manifestDoc));
  return { weights, dir };
}
