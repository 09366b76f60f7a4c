/** Training loop for the reference CNN with checkpoint/resume.
 *
 * Deterministic for a given seed and config: a single seeded PRNG drives
 * initialization, the train/validation split, and every epoch shuffle,
 * and its state rides along in checkpoints.  The manifest deliberately
 * contains no wall-clock fields so identical runs write identical
 * manifests.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { loadMnist } from "./mnist.js";
import { LAYER_DOC, PARAM_DEFS, ReferenceCnn, parameterCounts } from "./model.js";
import { Rng } from "./rng.js";
import { NamedTensor, loadWeightsFile, saveWeightsFile } from "./weights.js";

export interface TrainConfig {
  outDir: string;
  dataDir?: string;
  seed: number;
  epochs: number;
  batchSize: number;
  learningRate: number;
  /** Per-epoch multiplicative learning-rate decay (1 = constant). */
  lrDecay: number;
  trainSize: number;
  valSize: number;
  stopAt: number;
  evalTest: boolean;
  resume: boolean;
  log?: (line: string) => void;
}

export const DEFAULT_CONFIG: Omit<TrainConfig, "outDir"> = {
  seed: 0,
  epochs: 4,
  batchSize: 64,
  learningRate: 1e-3,
  lrDecay: 1.0,
  trainSize: 12000,
  valSize: 2000,
  stopAt: 0.985,
  evalTest: true,
  resume: false,
};

export interface TrainResult {
  epochsRun: number;
  valAccuracy: number;
  testAccuracy?: number;
  weightsPath: string;
  manifestPath: string;
}

interface CheckpointMeta {
  epoch: number;
  adamStep: number;
  rngState: number;
  valAccuracy: number;
}

function paramsToTensors(model: ReferenceCnn): NamedTensor[] {
  return PARAM_DEFS.map((def) => ({
    name: def.name,
    shape: def.shape,
    data: Float32Array.from(model.params.get(def.name)!),
  }));
}

function saveCheckpoint(dir: string, model: ReferenceCnn, meta: CheckpointMeta): void {
  const tensors = paramsToTensors(model);
  const adam = model.adamState();
  if (adam) {
    for (const def of PARAM_DEFS) {
      tensors.push({
        name: `adam.m.${def.name}`,
        shape: def.shape,
        data: Float32Array.from(adam.m.get(def.name)!),
      });
      tensors.push({
        name: `adam.v.${def.name}`,
        shape: def.shape,
        data: Float32Array.from(adam.v.get(def.name)!),
      });
    }
  }
  saveWeightsFile(path.join(dir, "checkpoint.bin"), tensors);
  fs.writeFileSync(path.join(dir, "checkpoint.json"), JSON.stringify(meta, null, 1));
}

function loadCheckpoint(dir: string, model: ReferenceCnn): CheckpointMeta | undefined {
  const binPath = path.join(dir, "checkpoint.bin");
  const metaPath = path.join(dir, "checkpoint.json");
  if (!fs.existsSync(binPath) || !fs.existsSync(metaPath)) return undefined;
  const tensors = new Map(loadWeightsFile(binPath).map((t) => [t.name, t]));
  const meta = JSON.parse(fs.readFileSync(metaPath, "utf-8")) as CheckpointMeta;
  const m = new Map<string, Float32Array>();
  const v = new Map<string, Float32Array>();
  for (const def of PARAM_DEFS) {
    model.params.get(def.name)!.set(tensors.get(def.name)!.data);
    const mt = tensors.get(`adam.m.${def.name}`);
    const vt = tensors.get(`adam.v.${def.name}`);
    if (mt && vt) {
      m.set(def.name, mt.data);
      v.set(def.name, vt.data);
    }
  }
  if (m.size === PARAM_DEFS.length) model.restoreAdam(m, v, meta.adamStep);
  return meta;
}

export function trainMnist(config: TrainConfig): TrainResult {
  const log = config.log ?? ((line: string) => console.log(line));
  fs.mkdirSync(config.outDir, { recursive: true });

  const wanted = config.trainSize + config.valSize;
  const data = loadMnist(config.dataDir);
  if (data.train.count < wanted) {
    throw new Error(`need ${wanted} training images, found ${data.train.count}`);
  }
  log(`mnist: ${data.train.count} train / ${data.test.count} test images from ${data.source}`);

  const rng = new Rng(config.seed);
  const model = new ReferenceCnn("f32", config.seed);

  // train/val split from one seeded shuffle of the full training set
  const order = new Int32Array(data.train.count);
  for (let i = 0; i < order.length; i++) order[i] = i;
  rng.shuffle(order);
  const pick = (offset: number, count: number) => {
    const images = new Float32Array(count * 784);
    const labels = new Int32Array(count);
    for (let i = 0; i < count; i++) {
      const src = order[offset + i];
      images.set(data.train.images.subarray(src * 784, (src + 1) * 784), i * 784);
      labels[i] = data.train.labels[src];
    }
    return { images, labels, count };
  };
  const train = pick(0, config.trainSize);
  const val = pick(config.trainSize, config.valSize);

  let startEpoch = 0;
  let valAccuracy = 0;
  if (config.resume) {
    const meta = loadCheckpoint(config.outDir, model);
    if (meta) {
      startEpoch = meta.epoch;
      valAccuracy = meta.valAccuracy;
      rng.setState(meta.rngState);
      log(`resumed at epoch ${meta.epoch} (val accuracy ${meta.valAccuracy.toFixed(4)})`);
    }
  }

  const grads = model.newGradBuffers();
  const batch = config.batchSize;
  const perEpoch = Math.floor(train.count / batch);
  const x = new Float32Array(batch * 784);
  const y = new Int32Array(batch);
  const epochOrder = new Int32Array(train.count);

  let epoch = startEpoch;
  while (epoch < config.epochs && valAccuracy < config.stopAt) {
    const epochLr = config.learningRate * Math.pow(config.lrDecay, epoch);
    for (let i = 0; i < train.count; i++) epochOrder[i] = i;
    rng.shuffle(epochOrder);
    const t0 = Date.now();
    let lossSum = 0;
    for (let b = 0; b < perEpoch; b++) {
      for (let i = 0; i < batch; i++) {
        const src = epochOrder[b * batch + i];
        x.set(train.images.subarray(src * 784, (src + 1) * 784), i * 784);
        y[i] = train.labels[src];
      }
      lossSum += model.lossAndGrads(x, y, batch, grads);
      model.adamStep(grads, epochLr);
      if ((b + 1) % 25 === 0) {
        const rate = ((b + 1) * batch) / ((Date.now() - t0) / 1000);
        log(`epoch ${epoch + 1} batch ${b + 1}/${perEpoch} ` +
            `loss ${(lossSum / (b + 1)).toFixed(4)} (${rate.toFixed(0)} img/s)`);
      }
    }
    epoch++;
    valAccuracy = model.evaluate(val.images, val.labels, val.count);
    log(`epoch ${epoch}: mean loss ${(lossSum / perEpoch).toFixed(4)}, ` +
        `val accuracy ${valAccuracy.toFixed(4)} ` +
        `(${((Date.now() - t0) / 1000).toFixed(0)} s)`);
    saveCheckpoint(config.outDir, model, {
      epoch,
      adamStep: model.adamStepCount,
      rngState: rng.getState(),
      valAccuracy,
    });
  }

  let testAccuracy: number | undefined;
  if (config.evalTest) {
    log(`evaluating on the ${data.test.count}-image test set...`);
    testAccuracy = model.evaluate(data.test.images, data.test.labels, data.test.count);
    log(`test accuracy ${testAccuracy.toFixed(4)}`);
  }

  const weightsPath = path.join(config.outDir, "weights.bin");
  saveWeightsFile(weightsPath, paramsToTensors(model));

  const manifest = {
    layers: LAYER_DOC,
    tensors: PARAM_DEFS.map((d) => d.name),
    metadata: {
      input_shape: "28,28,1",
      task: "mnist-digits",
      seed: String(config.seed),
      epochs: String(epoch),
      batch_size: String(config.batchSize),
      learning_rate: String(config.learningRate),
      lr_decay: String(config.lrDecay),
      train_size: String(config.trainSize),
      val_accuracy: valAccuracy.toFixed(6),
      ...(testAccuracy !== undefined ? { test_accuracy: testAccuracy.toFixed(6) } : {}),
      parameter_counts: parameterCounts().join("/"),
    },
  };
  const manifestPath = path.join(config.outDir, "manifest.json");
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 1) + "\n");

  return { epochsRun: epoch, valAccuracy, testAccuracy, weightsPath, manifestPath };
}
