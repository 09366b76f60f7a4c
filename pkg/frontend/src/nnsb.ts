/** NNSB v1 bundle writer/reader, byte-compatible with the core toolkit.
 *
 * Layout (little-endian): magic "NNSB", u16 version, u32 layer count +
 * layer descriptors, u32 tensor count + tensor blocks, u32 metadata
 * count + key/value pairs sorted by key, trailing CRC-32 of everything
 * before it.  Tensor block: name, u8 codec id (0 binary, 1 gray,
 * 2 hamming, 3 half), u8 q, u8 parity, f64 w_min, f64 w_max, u8 rank +
 * u32 dims, then ceil(count*q/8) bytes of packed words (word w at
 * stream bits [w*q, (w+1)*q), bit 0 first, stream bit n at bit n%8 of
 * byte n//8).  With parity, the check bit is the most significant of
 * the q stored bits and the data word is q-1 bits wide.
 *
 * Quantization arithmetic deliberately mirrors the core implementation
 * operation for operation (same IEEE-754 double expressions), so
 * exporting the same weights produces the same bytes; the shared golden
 * fixtures pin this.
 */

import { crc32 } from "./crc32.js";

export const CODEC_IDS = { binary: 0, gray: 1, hamming: 2, half: 3 } as const;
export type CodecName = keyof typeof CODEC_IDS;

const ACTIVATIONS = ["relu", "sigmoid"] as const;

export const CONSTANT_GRID_EPSILON = 1e-6;
// Fixed rendering of the epsilon in metadata (module-independent pin).
const EPSILON_STRING = "1e-06";

const MAX_TABLE_WIDTH = 20;

export interface LayerDoc {
  kind: "dense" | "conv2d" | "maxpool2d" | "activation" | "flatten" | "softmax";
  weights?: string;
  bias?: string;
  kernels?: string;
  window?: number[];
  fn?: string;
}

export interface RealTensor {
  name: string;
  shape: number[];
  values: Float64Array;
}

export interface CodecOptions {
  codec: CodecName;
  q: number;
  parity: boolean;
  gridPolicy: "per-tensor" | "global";
}

export interface Grid {
  lo: number;
  hi: number;
}

// --- codec word tables ---------------------------------------------------

function popcount(x: number): number {
  let c = 0;
  while (x) {
    x &= x - 1;
    c++;
  }
  return c;
}

const tableCache = new Map<string, Uint32Array>();

/** index -> word bits for a width-bit codec. */
export function wordTable(codec: CodecName, width: number): Uint32Array {
  if (width < 1 || width > MAX_TABLE_WIDTH) {
    throw new Error(`codec width ${width} outside supported range 1..${MAX_TABLE_WIDTH}`);
  }
  const key = `${codec}:${width}`;
  const cached = tableCache.get(key);
  if (cached) return cached;
  const n = 1 << width;
  const table = new Uint32Array(n);
  if (codec === "binary") {
    for (let i = 0; i < n; i++) table[i] = i;
  } else if (codec === "gray") {
    for (let i = 0; i < n; i++) table[i] = i ^ (i >>> 1);
  } else if (codec === "hamming") {
    // rank words by (Hamming weight, numeric value); numeric order equals
    // msb-first lexicographic order at fixed width
    const words = Array.from({ length: n }, (_, w) => w);
    words.sort((a, b) => popcount(a) - popcount(b) || a - b);
    for (let i = 0; i < n; i++) table[i] = words[i];
  } else {
    throw new Error("ieee-half has no index table; encode values directly");
  }
  tableCache.set(key, table);
  return table;
}

// --- IEEE binary16 encode --------------------------------------------------

const F64_VIEW = new DataView(new ArrayBuffer(8));

/** Round-to-nearest-even float64 -> binary16 bit pattern. */
export function halfEncode(w: number): number {
  if (!Number.isFinite(w)) throw new Error(`cannot encode non-finite value ${w}`);
  if (Math.abs(w) > 65504) {
    throw new Error(`|${w}| exceeds largest finite binary16 value 65504`);
  }
  F64_VIEW.setFloat64(0, w, true);
  const d = F64_VIEW.getBigUint64(0, true);
  const sign = Number((d >> 63n) & 1n);
  const e = Number((d >> 52n) & 0x7ffn);
  const m = d & ((1n << 52n) - 1n);
  if (e === 0 && m === 0n) return sign << 15;

  let sig: bigint;
  let exp2: number;
  if (e === 0) {
    sig = m;
    exp2 = -1074;
  } else {
    sig = m | (1n << 52n);
    exp2 = e - 1075;
  }
  const roundHalfEven = (num: bigint, shift: number): bigint => {
    if (shift <= 0) return num << BigInt(-shift);
    const s = BigInt(shift);
    const q = num >> s;
    const r = num & ((1n << s) - 1n);
    const half = 1n << (s - 1n);
    return r > half || (r === half && (q & 1n) === 1n) ? q + 1n : q;
  };

  const top = sig.toString(2).length - 1 + exp2;
  if (top < -14) {
    const sub = roundHalfEven(sig, -24 - exp2);
    if (sub >= 1024n) return (sign << 15) | (1 << 10);
    return (sign << 15) | Number(sub);
  }
  let frac = roundHalfEven(sig, top - 10 - exp2);
  let t = top;
  if (frac === 2048n) {
    t += 1;
    frac = 1024n;
  }
  return (sign << 15) | ((t + 15) << 10) | (Number(frac) - 1024);
}

// --- quantization -----------------------------------------------------------

export function tensorGrid(values: Float64Array): { grid: Grid; widened: boolean } {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === hi) {
    return { grid: { lo: lo - CONSTANT_GRID_EPSILON, hi: hi + CONSTANT_GRID_EPSILON }, widened: true };
  }
  return { grid: { lo, hi }, widened: false };
}

export function quantizeIndices(values: Float64Array, grid: Grid, q: number): Int32Array {
  const n = 1 << q;
  const out = new Int32Array(values.length);
  for (let i = 0; i < values.length; i++) {
    const w = Math.min(Math.max(values[i], grid.lo), grid.hi);
    const idx = Math.floor(((w - grid.lo) / (grid.hi - grid.lo)) * n);
    out[i] = idx < n - 1 ? idx : n - 1;
  }
  return out;
}

/** Encode values into stored q-bit words under the codec options. */
export function encodeWords(
  values: Float64Array, grid: Grid, opts: CodecOptions,
): Uint32Array {
  if (opts.codec === "half") {
    const words = new Uint32Array(values.length);
    for (let i = 0; i < values.length; i++) words[i] = halfEncode(values[i]);
    return words;
  }
  const dataWidth = opts.parity ? opts.q - 1 : opts.q;
  const table = wordTable(opts.codec, dataWidth);
  const indices = quantizeIndices(values, grid, dataWidth);
  const words = new Uint32Array(values.length);
  for (let i = 0; i < values.length; i++) {
    let w = table[indices[i]];
    if (opts.parity) w |= (popcount(w) & 1) << dataWidth;
    words[i] = w;
  }
  return words;
}

export function packWords(words: Uint32Array, q: number): Uint8Array {
  const out = new Uint8Array(Math.ceil((words.length * q) / 8));
  let bit = 0;
  for (let i = 0; i < words.length; i++) {
    const w = words[i];
    for (let j = 0; j < q; j++) {
      if ((w >>> j) & 1) out[bit >> 3] |= 1 << (bit & 7);
      bit++;
    }
  }
  return out;
}

export function unpackWords(packed: Uint8Array, count: number, q: number): Uint32Array {
  if (packed.length * 8 < count * q) throw new Error("packed stream too short");
  const out = new Uint32Array(count);
  let bit = 0;
  for (let i = 0; i < count; i++) {
    let w = 0;
    for (let j = 0; j < q; j++) {
      w |= ((packed[bit >> 3] >> (bit & 7)) & 1) << j;
      bit++;
    }
    out[i] = w >>> 0;
  }
  return out;
}

// --- bundle assembly ----------------------------------------------------------

export interface BundleTensor {
  name: string;
  shape: number[];
  codec: CodecName;
  q: number;
  parity: boolean;
  grid: Grid;
  packed: Uint8Array;
}

export interface Bundle {
  layers: LayerDoc[];
  tensors: BundleTensor[];
  metadata: Record<string, string>;
}

/** Quantize an ordered tensor list into a bundle (mirrors the core
 * quantize-model semantics, including metadata keys). */
export function buildBundle(
  layers: LayerDoc[],
  tensors: RealTensor[],
  opts: CodecOptions,
  baseMetadata: Record<string, string> = {},
): Bundle {
  const metadata: Record<string, string> = { ...baseMetadata };
  metadata["codec"] = opts.codec;
  metadata["q"] = String(opts.q);
  metadata["parity"] = opts.parity ? "1" : "0";
  metadata["grid_policy"] = opts.gridPolicy;

  const width = opts.codec === "half" ? 16 : opts.parity ? opts.q - 1 : opts.q;

  let shared: Grid | undefined;
  if (opts.gridPolicy === "global") {
    let lo = Infinity;
    let hi = -Infinity;
    for (const t of tensors) {
      for (const v of t.values) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
      }
    }
    if (lo === hi) {
      lo -= CONSTANT_GRID_EPSILON;
      hi += CONSTANT_GRID_EPSILON;
      metadata["grid_widened"] = EPSILON_STRING;
    }
    shared = { lo, hi };
  }

  const out: BundleTensor[] = [];
  for (const t of tensors) {
    let grid: Grid;
    if (shared) {
      grid = shared;
    } else {
      const derived = tensorGrid(t.values);
      grid = derived.grid;
      if (derived.widened) metadata[`grid_widened:${t.name}`] = EPSILON_STRING;
    }
    const words = encodeWords(t.values, grid, opts);
    out.push({
      name: t.name,
      shape: t.shape,
      codec: opts.codec,
      q: opts.q,
      parity: opts.parity,
      grid,
      packed: packWords(words, opts.q),
    });
  }
  return { layers, tensors: out, metadata };
}

class ByteWriter {
  private parts: Buffer[] = [];

  raw(b: Uint8Array): void {
    this.parts.push(Buffer.from(b));
  }

  u8(v: number): void {
    const b = Buffer.alloc(1);
    b.writeUInt8(v, 0);
    this.parts.push(b);
  }

  u16(v: number): void {
    const b = Buffer.alloc(2);
    b.writeUInt16LE(v, 0);
    this.parts.push(b);
  }

  u32(v: number): void {
    const b = Buffer.alloc(4);
    b.writeUInt32LE(v >>> 0, 0);
    this.parts.push(b);
  }

  f64(v: number): void {
    const b = Buffer.alloc(8);
    b.writeDoubleLE(v, 0);
    this.parts.push(b);
  }

  string(s: string): void {
    const data = Buffer.from(s, "utf-8");
    if (data.length > 0xffff) throw new Error("string too long to serialize");
    this.u16(data.length);
    this.parts.push(data);
  }

  concat(): Buffer {
    return Buffer.concat(this.parts);
  }
}

function writeLayer(w: ByteWriter, layer: LayerDoc): void {
  switch (layer.kind) {
    case "dense":
      w.u8(0);
      w.string(layer.weights!);
      w.string(layer.bias!);
      break;
    case "conv2d":
      w.u8(1);
      w.string(layer.kernels!);
      w.string(layer.bias!);
      break;
    case "maxpool2d": {
      const [h, ww] = layer.window ?? [2, 2];
      w.u8(2);
      w.u8(h);
      w.u8(ww);
      break;
    }
    case "activation": {
      const id = ACTIVATIONS.indexOf(layer.fn as (typeof ACTIVATIONS)[number]);
      if (id < 0) throw new Error(`unknown activation ${layer.fn}`);
      w.u8(3);
      w.u8(id);
      break;
    }
    case "flatten":
      w.u8(4);
      break;
    case "softmax":
      w.u8(5);
      break;
    default:
      throw new Error(`unknown layer kind ${(layer as LayerDoc).kind}`);
  }
}

export function bundleToBytes(bundle: Bundle): Buffer {
  const w = new ByteWriter();
  w.raw(Buffer.from("NNSB", "ascii"));
  w.u16(1);
  w.u32(bundle.layers.length);
  for (const layer of bundle.layers) writeLayer(w, layer);
  w.u32(bundle.tensors.length);
  for (const t of bundle.tensors) {
    w.string(t.name);
    w.u8(CODEC_IDS[t.codec]);
    w.u8(t.q);
    w.u8(t.parity ? 1 : 0);
    w.f64(t.grid.lo);
    w.f64(t.grid.hi);
    w.u8(t.shape.length);
    for (const d of t.shape) w.u32(d);
    w.raw(t.packed);
  }
  const keys = Object.keys(bundle.metadata).sort();
  w.u32(keys.length);
  for (const key of keys) {
    w.string(key);
    w.string(bundle.metadata[key]);
  }
  const body = w.concat();
  const tail = Buffer.alloc(4);
  tail.writeUInt32LE(crc32(body), 0);
  return Buffer.concat([body, tail]);
}

// --- reader ----------------------------------------------------------------

class ByteReader {
  pos = 0;

  constructor(private readonly buf: Buffer) {}

  private need(n: number): void {
    if (this.pos + n > this.buf.length) {
      throw new Error(`truncated bundle: wanted ${n} bytes at offset ${this.pos}`);
    }
  }

  u8(): number {
    this.need(1);
    return this.buf.readUInt8(this.pos++);
  }

  u16(): number {
    this.need(2);
    const v = this.buf.readUInt16LE(this.pos);
    this.pos += 2;
    return v;
  }

  u32(): number {
    this.need(4);
    const v = this.buf.readUInt32LE(this.pos);
    this.pos += 4;
    return v;
  }

  f64(): number {
    this.need(8);
    const v = this.buf.readDoubleLE(this.pos);
    this.pos += 8;
    return v;
  }

  take(n: number): Buffer {
    this.need(n);
    const v = this.buf.subarray(this.pos, this.pos + n);
    this.pos += n;
    return v;
  }

  string(): string {
    return this.take(this.u16()).toString("utf-8");
  }

  get remaining(): number {
    return this.buf.length - this.pos;
  }
}

const CODEC_BY_ID: CodecName[] = ["binary", "gray", "hamming", "half"];

export function bundleFromBytes(data: Buffer): Bundle {
  if (data.length < 10 || data.subarray(0, 4).toString("ascii") !== "NNSB") {
    throw new Error("not an NNSB bundle (bad magic)");
  }
  const stored = data.readUInt32LE(data.length - 4);
  const actual = crc32(data.subarray(0, data.length - 4));
  if (stored !== actual) {
    throw new Error(`bundle checksum mismatch (stored ${stored}, computed ${actual})`);
  }
  const r = new ByteReader(data.subarray(0, data.length - 4));
  r.take(4);
  const version = r.u16();
  if (version !== 1) throw new Error(`unsupported bundle version ${version}`);
  const layers: LayerDoc[] = [];
  const layerCount = r.u32();
  for (let i = 0; i < layerCount; i++) {
    const kind = r.u8();
    if (kind === 0) layers.push({ kind: "dense", weights: r.string(), bias: r.string() });
    else if (kind === 1) layers.push({ kind: "conv2d", kernels: r.string(), bias: r.string() });
    else if (kind === 2) layers.push({ kind: "maxpool2d", window: [r.u8(), r.u8()] });
    else if (kind === 3) layers.push({ kind: "activation", fn: ACTIVATIONS[r.u8()] });
    else if (kind === 4) layers.push({ kind: "flatten" });
    else if (kind === 5) layers.push({ kind: "softmax" });
    else throw new Error(`unknown layer id ${kind}`);
  }
  const tensors: BundleTensor[] = [];
  const tensorCount = r.u32();
  for (let i = 0; i < tensorCount; i++) {
    const name = r.string();
    const codecId = r.u8();
    if (codecId >= CODEC_BY_ID.length) throw new Error(`unknown codec id ${codecId}`);
    const q = r.u8();
    const parityFlag = r.u8();
    if (parityFlag > 1) throw new Error(`bad parity flag ${parityFlag}`);
    const lo = r.f64();
    const hi = r.f64();
    const rank = r.u8();
    const shape: number[] = [];
    for (let d = 0; d < rank; d++) shape.push(r.u32());
    const count = shape.reduce((a, b) => a * b, 1);
    const packed = new Uint8Array(r.take(Math.ceil((count * q) / 8)));
    tensors.push({
      name,
      shape,
      codec: CODEC_BY_ID[codecId],
      q,
      parity: parityFlag === 1,
      grid: { lo, hi },
      packed,
    });
  }
  const metadata: Record<string, string> = {};
  const metaCount = r.u32();
  for (let i = 0; i < metaCount; i++) {
    const key = r.string();
    metadata[key] = r.string();
  }
  if (r.remaining !== 0) throw new Error(`${r.remaining} trailing bytes after metadata`);
  return { layers, tensors, metadata };
}
