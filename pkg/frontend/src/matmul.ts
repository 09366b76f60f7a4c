/** Register-blocked matrix kernels on flat typed arrays.
 *
 * These are the hot loops of training: plain V8-friendly code with 2x4
 * accumulator blocks reaches a few GFLOP/s, which puts the reference CNN
 * within desk-scale training time without native dependencies.  All
 * kernels are dtype-generic so gradient checks can run in float64.
 */

export type FloatArray = Float32Array | Float64Array;

export function alloc(like: FloatArray, n: number): FloatArray {
  return new (like.constructor as new (n: number) => FloatArray)(n);
}

/** C[M,N] = A[M,K] @ B[K,N]; C is overwritten. */
export function matmul(
  a: FloatArray, b: FloatArray, c: FloatArray,
  m: number, k: number, n: number,
): void {
  const n4 = n - (n % 4);
  const m2 = m - (m % 2);
  for (let i = 0; i < m2; i += 2) {
    const a0 = i * k, a1 = a0 + k, c0 = i * n, c1 = c0 + n;
    for (let j = 0; j < n4; j += 4) {
      let s00 = 0, s01 = 0, s02 = 0, s03 = 0;
      let s10 = 0, s11 = 0, s12 = 0, s13 = 0;
      for (let p = 0; p < k; p++) {
        const x0 = a[a0 + p], x1 = a[a1 + p];
        const bp = p * n + j;
        const w0 = b[bp], w1 = b[bp + 1], w2 = b[bp + 2], w3 = b[bp + 3];
        s00 += x0 * w0; s01 += x0 * w1; s02 += x0 * w2; s03 += x0 * w3;
        s10 += x1 * w0; s11 += x1 * w1; s12 += x1 * w2; s13 += x1 * w3;
      }
      c[c0 + j] = s00; c[c0 + j + 1] = s01; c[c0 + j + 2] = s02; c[c0 + j + 3] = s03;
      c[c1 + j] = s10; c[c1 + j + 1] = s11; c[c1 + j + 2] = s12; c[c1 + j + 3] = s13;
    }
    for (let j = n4; j < n; j++) {
      let s0 = 0, s1 = 0;
      for (let p = 0; p < k; p++) {
        const w = b[p * n + j];
        s0 += a[a0 + p] * w;
        s1 += a[a1 + p] * w;
      }
      c[c0 + j] = s0;
      c[c1 + j] = s1;
    }
  }
  for (let i = m2; i < m; i++) {
    const ai = i * k, ci = i * n;
    for (let j = 0; j < n; j++) {
      let s = 0;
      for (let p = 0; p < k; p++) s += a[ai + p] * b[p * n + j];
      c[ci + j] = s;
    }
  }
}

/** C[K,N] += A^T[K,R] @ B[R,N] for A stored as [R,K]; gradient of weights. */
export function accumulateAtB(
  a: FloatArray, b: FloatArray, c: FloatArray,
  r: number, k: number, n: number,
): void {
  for (let i = 0; i < r; i++) {
    const ai = i * k, bi = i * n;
    for (let p = 0; p < k; p++) {
      const x = a[ai + p];
      if (x === 0) continue;
      const cp = p * n;
      for (let j = 0; j < n; j++) c[cp + j] += x * b[bi + j];
    }
  }
}

/** C[M,K] = A[M,N] @ B^T[N,K] for B stored as [K,N]; gradient of inputs. */
export function matmulBt(
  a: FloatArray, b: FloatArray, c: FloatArray,
  m: number, n: number, k: number,
): void {
  // transpose B once; the weight matrices here are small
  const bt = alloc(b, n * k);
  for (let p = 0; p < k; p++) {
    for (let j = 0; j < n; j++) bt[j * k + p] = b[p * n + j];
  }
  matmul(a, bt, c, m, n, k);
}
