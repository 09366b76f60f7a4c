/** The reference MNIST CNN: two 3x3x32 convolutions, max-pool, two
 * 3x3x64 convolutions, max-pool, a 256-unit dense layer, and a 10-way
 * softmax head, all with valid padding.  Trainable parameter counts per
 * layer are 320 / 9248 / 18496 / 36928 / 262400 / 2570.
 *
 * Forward, backward, and the Adam step are hand-rolled on flat typed
 * arrays; float64 mode exists for gradient checking.
 */

import {
  ConvShape,
  col2im,
  convBackward,
  convForward,
  denseBackward,
  denseForward,
  im2col,
  maxPoolBackward,
  maxPoolForward,
  reluBackward,
  reluForward,
  softmaxCrossEntropy,
  softmaxRows,
} from "./layers.js";
import { FloatArray } from "./matmul.js";
import { Rng } from "./rng.js";

export interface TensorDef {
  name: string;
  shape: number[];
}

export const PARAM_DEFS: TensorDef[] = [
  { name: "conv1.k", shape: [3, 3, 1, 32] },
  { name: "conv1.b", shape: [32] },
  { name: "conv2.k", shape: [3, 3, 32, 32] },
  { name: "conv2.b", shape: [32] },
  { name: "conv3.k", shape: [3, 3, 32, 64] },
  { name: "conv3.b", shape: [64] },
  { name: "conv4.k", shape: [3, 3, 64, 64] },
  { name: "conv4.b", shape: [64] },
  { name: "fc1.w", shape: [1024, 256] },
  { name: "fc1.b", shape: [256] },
  { name: "fc2.w", shape: [256, 10] },
  { name: "fc2.b", shape: [10] },
];

/** Layer descriptors in the bundle format's architecture vocabulary. */
export const LAYER_DOC = [
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
] as const;

export function elementCount(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

/** Trainable parameters per Table-1 row (kernel + bias pairs). */
export function parameterCounts(): number[] {
  const counts: number[] = [];
  for (let i = 0; i < PARAM_DEFS.length; i += 2) {
    counts.push(
      elementCount(PARAM_DEFS[i].shape) + elementCount(PARAM_DEFS[i + 1].shape),
    );
  }
  return counts;
}

type Dtype = "f32" | "f64";

function allocDtype(dtype: Dtype, n: number): FloatArray {
  return dtype === "f32" ? new Float32Array(n) : new Float64Array(n);
}

const CONV1: Omit<ConvShape, "batch"> = { h: 28, w: 28, cin: 1, kh: 3, kw: 3, cout: 32 };
const CONV2: Omit<ConvShape, "batch"> = { h: 26, w: 26, cin: 32, kh: 3, kw: 3, cout: 32 };
const CONV3: Omit<ConvShape, "batch"> = { h: 12, w: 12, cin: 32, kh: 3, kw: 3, cout: 64 };
const CONV4: Omit<ConvShape, "batch"> = { h: 10, w: 10, cin: 64, kh: 3, kw: 3, cout: 64 };

interface ConvStage {
  shape: ConvShape;
  rows: number;
  colWidth: number;
  cols: FloatArray;
  z: FloatArray;
  a: FloatArray;
  dz: FloatArray;
  dcols?: FloatArray;
}

interface Scratch {
  batch: number;
  conv: ConvStage[];
  pool1: FloatArray;
  pool1Arg: Int32Array;
  dpool1: FloatArray;
  pool2: FloatArray;
  pool2Arg: Int32Array;
  dpool2: FloatArray;
  z5: FloatArray;
  a5: FloatArray;
  dz5: FloatArray;
  z6: FloatArray;
  probs: FloatArray;
  dz6: FloatArray;
  da: FloatArray[];
}

export class ReferenceCnn {
  readonly dtype: Dtype;
  readonly params = new Map<string, FloatArray>();
  private adamM?: Map<string, FloatArray>;
  private adamV?: Map<string, FloatArray>;
  adamStepCount = 0;
  private scratch?: Scratch;

  constructor(dtype: Dtype = "f32", seed = 0) {
    this.dtype = dtype;
    const rng = new Rng(seed);
    for (const def of PARAM_DEFS) {
      const n = elementCount(def.shape);
      const arr = allocDtype(dtype, n);
      if (def.shape.length > 1) {
        const fanIn =
          def.shape.length === 4
            ? def.shape[0] * def.shape[1] * def.shape[2]
            : def.shape[0];
        const scale = Math.sqrt(2 / fanIn);
        for (let i = 0; i < n; i++) arr[i] = rng.normal() * scale;
      }
      this.params.set(def.name, arr);
    }
  }

  private getScratch(batch: number): Scratch {
    if (this.scratch && this.scratch.batch === batch) return this.scratch;
    const mk = (n: number) => allocDtype(this.dtype, n);
    const stage = (s: Omit<ConvShape, "batch">, withDcols: boolean): ConvStage => {
      const shape = { ...s, batch };
      const oh = shape.h - shape.kh + 1;
      const ow = shape.w - shape.kw + 1;
      const rows = batch * oh * ow;
      const colWidth = shape.kh * shape.kw * shape.cin;
      return {
        shape,
        rows,
        colWidth,
        cols: mk(rows * colWidth),
        z: mk(rows * shape.cout),
        a: mk(rows * shape.cout),
        dz: mk(rows * shape.cout),
        dcols: withDcols ? mk(rows * colWidth) : undefined,
      };
    };
    this.scratch = {
      batch,
      conv: [stage(CONV1, false), stage(CONV2, true), stage(CONV3, true), stage(CONV4, true)],
      pool1: mk(batch * 12 * 12 * 32),
      pool1Arg: new Int32Array(batch * 12 * 12 * 32),
      dpool1: mk(batch * 12 * 12 * 32),
      pool2: mk(batch * 4 * 4 * 64),
      pool2Arg: new Int32Array(batch * 4 * 4 * 64),
      dpool2: mk(batch * 4 * 4 * 64),
      z5: mk(batch * 256),
      a5: mk(batch * 256),
      dz5: mk(batch * 256),
      z6: mk(batch * 10),
      probs: mk(batch * 10),
      dz6: mk(batch * 10),
      da: [mk(batch * 26 * 26 * 32), mk(batch * 24 * 24 * 32),
           mk(batch * 10 * 10 * 64), mk(batch * 8 * 8 * 64)],
    };
    return this.scratch;
  }

  /** Logits for a batch of flattened 28x28 images. */
  forwardLogits(x: FloatArray, batch: number): FloatArray {
    const s = this.getScratch(batch);
    const p = (name: string) => this.params.get(name)!;

    im2col(x, s.conv[0].shape, s.conv[0].cols);
    convForward(s.conv[0].cols, p("conv1.k"), p("conv1.b"),
                s.conv[0].rows, s.conv[0].colWidth, 32, s.conv[0].z);
    reluForward(s.conv[0].z, s.conv[0].a);

    im2col(s.conv[0].a, s.conv[1].shape, s.conv[1].cols);
    convForward(s.conv[1].cols, p("conv2.k"), p("conv2.b"),
                s.conv[1].rows, s.conv[1].colWidth, 32, s.conv[1].z);
    reluForward(s.conv[1].z, s.conv[1].a);

    maxPoolForward(s.conv[1].a, batch, 24, 24, 32, 2, 2, s.pool1, s.pool1Arg);

    im2col(s.pool1, s.conv[2].shape, s.conv[2].cols);
    convForward(s.conv[2].cols, p("conv3.k"), p("conv3.b"),
                s.conv[2].rows, s.conv[2].colWidth, 64, s.conv[2].z);
    reluForward(s.conv[2].z, s.conv[2].a);

    im2col(s.conv[2].a, s.conv[3].shape, s.conv[3].cols);
    convForward(s.conv[3].cols, p("conv4.k"), p("conv4.b"),
                s.conv[3].rows, s.conv[3].colWidth, 64, s.conv[3].z);
    reluForward(s.conv[3].z, s.conv[3].a);

    maxPoolForward(s.conv[3].a, batch, 8, 8, 64, 2, 2, s.pool2, s.pool2Arg);

    // pool2 is [batch, 4, 4, 64] row-major == flattened [batch, 1024]
    denseForward(s.pool2, p("fc1.w"), p("fc1.b"), batch, 1024, 256, s.z5);
    reluForward(s.z5, s.a5);
    denseForward(s.a5, p("fc2.w"), p("fc2.b"), batch, 256, 10, s.z6);
    return s.z6;
  }

  /** Class probabilities for a batch. */
  forwardProbs(x: FloatArray, batch: number): FloatArray {
    const logits = this.forwardLogits(x, batch);
    const s = this.getScratch(batch);
    softmaxRows(logits, batch, 10, s.probs);
    return s.probs;
  }

  /** Mean cross-entropy and parameter gradients for one batch. */
  lossAndGrads(
    x: FloatArray, labels: Int32Array, batch: number,
    grads: Map<string, FloatArray>,
  ): number {
    const s = this.getScratch(batch);
    const p = (name: string) => this.params.get(name)!;
    const g = (name: string) => grads.get(name)!;
    for (const arr of grads.values()) arr.fill(0);

    const logits = this.forwardLogits(x, batch);
    const loss = softmaxCrossEntropy(logits, labels, batch, 10, s.probs, s.dz6);

    denseBackward(s.a5, p("fc2.w"), s.dz6, batch, 256, 10,
                  g("fc2.w"), g("fc2.b"), s.dz5);
    reluBackward(s.z5, s.dz5, s.dz5);
    denseBackward(s.pool2, p("fc1.w"), s.dz5, batch, 1024, 256,
                  g("fc1.w"), g("fc1.b"), s.dpool2);

    maxPoolBackward(s.dpool2, s.pool2Arg, s.conv[3].dz);
    // dz currently holds d(activation); gate through relu of conv4
    reluBackward(s.conv[3].z, s.conv[3].dz, s.conv[3].dz);
    convBackward(s.conv[3].cols, p("conv4.k"), s.conv[3].dz,
                 s.conv[3].rows, s.conv[3].colWidth, 64,
                 g("conv4.k"), g("conv4.b"), s.conv[3].dcols);
    col2im(s.conv[3].dcols!, s.conv[3].shape, s.da[2]);

    reluBackward(s.conv[2].z, s.da[2], s.da[2]);
    convBackward(s.conv[2].cols, p("conv3.k"), s.da[2],
                 s.conv[2].rows, s.conv[2].colWidth, 64,
                 g("conv3.k"), g("conv3.b"), s.conv[2].dcols);
    col2im(s.conv[2].dcols!, s.conv[2].shape, s.dpool1);

    maxPoolBackward(s.dpool1, s.pool1Arg, s.conv[1].dz);
    reluBackward(s.conv[1].z, s.conv[1].dz, s.conv[1].dz);
    convBackward(s.conv[1].cols, p("conv2.k"), s.conv[1].dz,
                 s.conv[1].rows, s.conv[1].colWidth, 32,
                 g("conv2.k"), g("conv2.b"), s.conv[1].dcols);
    col2im(s.conv[1].dcols!, s.conv[1].shape, s.da[0]);

    reluBackward(s.conv[0].z, s.da[0], s.da[0]);
    convBackward(s.conv[0].cols, p("conv1.k"), s.da[0],
                 s.conv[0].rows, s.conv[0].colWidth, 32,
                 g("conv1.k"), g("conv1.b"), undefined);
    return loss;
  }

  newGradBuffers(): Map<string, FloatArray> {
    const grads = new Map<string, FloatArray>();
    for (const def of PARAM_DEFS) {
      grads.set(def.name, allocDtype(this.dtype, elementCount(def.shape)));
    }
    return grads;
  }

  adamStep(grads: Map<string, FloatArray>, lr: number, beta1 = 0.9, beta2 = 0.999, eps = 1e-8): void {
    if (!this.adamM) {
      this.adamM = this.newGradBuffers();
      this.adamV = this.newGradBuffers();
    }
    this.adamStepCount++;
    const c1 = 1 - Math.pow(beta1, this.adamStepCount);
    const c2 = 1 - Math.pow(beta2, this.adamStepCount);
    for (const def of PARAM_DEFS) {
      const w = this.params.get(def.name)!;
      const g = grads.get(def.name)!;
      const m = this.adamM.get(def.name)!;
      const v = this.adamV!.get(def.name)!;
      for (let i = 0; i < w.length; i++) {
        m[i] = beta1 * m[i] + (1 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1 - beta2) * g[i] * g[i];
        w[i] -= (lr * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + eps);
      }
    }
  }

  /** Top-1 accuracy over flattened images, evaluated in batches. */
  evaluate(images: Float32Array, labels: Int32Array, count: number, batch = 200): number {
    let hits = 0;
    const input = allocDtype(this.dtype, batch * 784);
    for (let start = 0; start < count; start += batch) {
      const n = Math.min(batch, count - start);
      if (n !== batch) {
        return (hits + this.evaluateTail(images, labels, start, n)) / count;
      }
      input.set(images.subarray(start * 784, (start + n) * 784));
      const probs = this.forwardProbs(input, batch);
      for (let r = 0; r < n; r++) {
        let best = 0;
        for (let j = 1; j < 10; j++) {
          if (probs[r * 10 + j] > probs[r * 10 + best]) best = j;
        }
        if (best === labels[start + r]) hits++;
      }
    }
    return hits / count;
  }

  private evaluateTail(images: Float32Array, labels: Int32Array, start: number, n: number): number {
    const input = allocDtype(this.dtype, n * 784);
    input.set(images.subarray(start * 784, (start + n) * 784));
    const probs = this.forwardProbs(input, n);
    this.scratch = undefined; // drop the odd-sized buffers
    let hits = 0;
    for (let r = 0; r < n; r++) {
      let best = 0;
      for (let j = 1; j < 10; j++) {
        if (probs[r * 10 + j] > probs[r * 10 + best]) best = j;
      }
      if (best === labels[start + r]) hits++;
    }
    return hits;
  }

  adamState(): { m: Map<string, FloatArray>; v: Map<string, FloatArray>; step: number } | undefined {
    if (!this.adamM) return undefined;
    return { m: this.adamM, v: this.adamV!, step: this.adamStepCount };
  }

  restoreAdam(m: Map<string, FloatArray>, v: Map<string, FloatArray>, step: number): void {
    this.adamM = m;
    this.adamV = v;
    this.adamStepCount = step;
  }
}
