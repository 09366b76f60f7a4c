/** Forward/backward primitives for the reference CNN.
 *
 * Layouts match the bundle format conventions: activations are
 * channels-last [batch, h, w, c] row-major, convolution kernels are
 * [kh, kw, cin, cout], dense weights [in, out].  Convolutions use valid
 * padding and stride 1 and are computed as im2col followed by a matmul.
 */

import { FloatArray, accumulateAtB, alloc, matmul, matmulBt } from "./matmul.js";

export interface ConvShape {
  batch: number;
  h: number;
  w: number;
  cin: number;
  kh: number;
  kw: number;
  cout: number;
}

export function convOutShape(s: ConvShape): { oh: number; ow: number } {
  return { oh: s.h - s.kh + 1, ow: s.w - s.kw + 1 };
}

/** Expand x[b,h,w,c] into rows of receptive fields: [b*oh*ow, kh*kw*cin]. */
export function im2col(x: FloatArray, s: ConvShape, out?: FloatArray): FloatArray {
  const { oh, ow } = convOutShape(s);
  const cols = s.kh * s.kw * s.cin;
  const m = out ?? alloc(x, s.batch * oh * ow * cols);
  let row = 0;
  for (let b = 0; b < s.batch; b++) {
    const xb = b * s.h * s.w * s.cin;
    for (let i = 0; i < oh; i++) {
      for (let j = 0; j < ow; j++) {
        let dst = row * cols;
        for (let di = 0; di < s.kh; di++) {
          let src = xb + ((i + di) * s.w + j) * s.cin;
          for (let dj = 0; dj < s.kw; dj++) {
            for (let c = 0; c < s.cin; c++) m[dst++] = x[src + c];
            src += s.cin;
          }
        }
        row++;
      }
    }
  }
  return m;
}

/** Scatter-add column gradients back into input layout (inverse of im2col). */
export function col2im(dcols: FloatArray, s: ConvShape, dx: FloatArray): void {
  const { oh, ow } = convOutShape(s);
  const cols = s.kh * s.kw * s.cin;
  dx.fill(0);
  let row = 0;
  for (let b = 0; b < s.batch; b++) {
    const xb = b * s.h * s.w * s.cin;
    for (let i = 0; i < oh; i++) {
      for (let j = 0; j < ow; j++) {
        let src = row * cols;
        for (let di = 0; di < s.kh; di++) {
          let dst = xb + ((i + di) * s.w + j) * s.cin;
          for (let dj = 0; dj < s.kw; dj++) {
            for (let c = 0; c < s.cin; c++) dx[dst + c] += dcols[src++];
            dst += s.cin;
          }
        }
        row++;
      }
    }
  }
}

export function convForward(
  cols: FloatArray, kernels: FloatArray, bias: FloatArray,
  rows: number, colWidth: number, cout: number, out: FloatArray,
): void {
  matmul(cols, kernels, out, rows, colWidth, cout);
  for (let r = 0; r < rows; r++) {
    const o = r * cout;
    for (let c = 0; c < cout; c++) out[o + c] += bias[c];
  }
}

export function convBackward(
  cols: FloatArray, kernels: FloatArray, dOut: FloatArray,
  rows: number, colWidth: number, cout: number,
  dKernels: FloatArray, dBias: FloatArray, dCols?: FloatArray,
): void {
  accumulateAtB(cols, dOut, dKernels, rows, colWidth, cout);
  for (let r = 0; r < rows; r++) {
    const o = r * cout;
    for (let c = 0; c < cout; c++) dBias[c] += dOut[o + c];
  }
  if (dCols) matmulBt(dOut, kernels, dCols, rows, cout, colWidth);
}

export function denseForward(
  x: FloatArray, w: FloatArray, b: FloatArray,
  batch: number, nin: number, nout: number, out: FloatArray,
): void {
  matmul(x, w, out, batch, nin, nout);
  for (let r = 0; r < batch; r++) {
    const o = r * nout;
    for (let c = 0; c < nout; c++) out[o + c] += b[c];
  }
}

export function denseBackward(
  x: FloatArray, w: FloatArray, dOut: FloatArray,
  batch: number, nin: number, nout: number,
  dW: FloatArray, dB: FloatArray, dX?: FloatArray,
): void {
  accumulateAtB(x, dOut, dW, batch, nin, nout);
  for (let r = 0; r < batch; r++) {
    const o = r * nout;
    for (let c = 0; c < nout; c++) dB[c] += dOut[o + c];
  }
  if (dX) matmulBt(dOut, w, dX, batch, nout, nin);
}

export function reluForward(x: FloatArray, out: FloatArray): void {
  for (let i = 0; i < x.length; i++) out[i] = x[i] > 0 ? x[i] : 0;
}

export function reluBackward(x: FloatArray, dOut: FloatArray, dX: FloatArray): void {
  for (let i = 0; i < x.length; i++) dX[i] = x[i] > 0 ? dOut[i] : 0;
}

/** 2-D max pooling; records flat argmax indices for the backward pass. */
export function maxPoolForward(
  x: FloatArray, batch: number, h: number, w: number, c: number,
  ph: number, pw: number, out: FloatArray, argmax: Int32Array,
): void {
  const oh = Math.floor(h / ph), ow = Math.floor(w / pw);
  let dst = 0;
  for (let b = 0; b < batch; b++) {
    const xb = b * h * w * c;
    for (let i = 0; i < oh; i++) {
      for (let j = 0; j < ow; j++) {
        for (let ch = 0; ch < c; ch++) {
          let best = -Infinity, bestAt = -1;
          for (let di = 0; di < ph; di++) {
            for (let dj = 0; dj < pw; dj++) {
              const at = xb + (((i * ph + di) * w) + (j * pw + dj)) * c + ch;
              if (x[at] > best) {
                best = x[at];
                bestAt = at;
              }
            }
          }
          out[dst] = best;
          argmax[dst] = bestAt;
          dst++;
        }
      }
    }
  }
}

export function maxPoolBackward(
  dOut: FloatArray, argmax: Int32Array, dX: FloatArray,
): void {
  dX.fill(0);
  for (let i = 0; i < dOut.length; i++) dX[argmax[i]] += dOut[i];
}

/** Row-wise softmax with max subtraction. */
export function softmaxRows(logits: FloatArray, batch: number, m: number, out: FloatArray): void {
  for (let r = 0; r < batch; r++) {
    const o = r * m;
    let top = -Infinity;
    for (let j = 0; j < m; j++) if (logits[o + j] > top) top = logits[o + j];
    let sum = 0;
    for (let j = 0; j < m; j++) {
      const e = Math.exp(logits[o + j] - top);
      out[o + j] = e;
      sum += e;
    }
    for (let j = 0; j < m; j++) out[o + j] /= sum;
  }
}

/** Mean cross-entropy of softmax rows against integer labels, plus the
 * logit gradient (softmax - onehot)/batch written into dLogits. */
export function softmaxCrossEntropy(
  logits: FloatArray, labels: Int32Array, batch: number, m: number,
  probs: FloatArray, dLogits: FloatArray,
): number {
  softmaxRows(logits, batch, m, probs);
  let loss = 0;
  for (let r = 0; r < batch; r++) {
    const p = probs[r * m + labels[r]];
    loss -= Math.log(p > 1e-300 ? p : 1e-300);
  }
  for (let i = 0; i < probs.length; i++) dLogits[i] = probs[i] / batch;
  for (let r = 0; r < batch; r++) dLogits[r * m + labels[r]] -= 1 / batch;
  return loss / batch;
}
