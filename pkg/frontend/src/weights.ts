/** Real-valued weight container ("NNSW"): the trainer's output format.
 *
 * Layout (little-endian): magic "NNSW", u16 version, u32 tensor count,
 * then per tensor: name (u16 length + UTF-8), u8 rank, u32 dims, f32
 * data; trailing CRC-32 of all preceding bytes.  Checkpoints reuse the
 * same container with optimizer-state tensors added under "adam.*".
 */

import * as fs from "node:fs";

import { crc32 } from "./crc32.js";

const MAGIC = Buffer.from("NNSW", "ascii");
const VERSION = 1;

export interface NamedTensor {
  name: string;
  shape: number[];
  data: Float32Array;
}

export function writeWeights(tensors: NamedTensor[]): Buffer {
  const parts: Buffer[] = [];
  const head = Buffer.alloc(MAGIC.length + 2 + 4);
  MAGIC.copy(head, 0);
  head.writeUInt16LE(VERSION, 4);
  head.writeUInt32LE(tensors.length, 6);
  parts.push(head);
  for (const t of tensors) {
    const name = Buffer.from(t.name, "utf-8");
    const meta = Buffer.alloc(2 + name.length + 1 + 4 * t.shape.length);
    meta.writeUInt16LE(name.length, 0);
    name.copy(meta, 2);
    meta.writeUInt8(t.shape.length, 2 + name.length);
    t.shape.forEach((d, i) => meta.writeUInt32LE(d, 2 + name.length + 1 + 4 * i));
    parts.push(meta);
    const data = Buffer.alloc(4 * t.data.length);
    for (let i = 0; i < t.data.length; i++) data.writeFloatLE(t.data[i], 4 * i);
    parts.push(data);
  }
  const body = Buffer.concat(parts);
  const tail = Buffer.alloc(4);
  tail.writeUInt32LE(crc32(body), 0);
  return Buffer.concat([body, tail]);
}

export function readWeights(buf: Buffer): NamedTensor[] {
  if (buf.length < 10 + 4 || !buf.subarray(0, 4).equals(MAGIC)) {
    throw new Error("not an NNSW weights file");
  }
  const stored = buf.readUInt32LE(buf.length - 4);
  const actual = crc32(buf.subarray(0, buf.length - 4));
  if (stored !== actual) throw new Error("NNSW checksum mismatch");
  if (buf.readUInt16LE(4) !== VERSION) {
    throw new Error(`unsupported NNSW version ${buf.readUInt16LE(4)}`);
  }
  let pos = 10;
  const need = (n: number) => {
    if (pos + n > buf.length - 4) throw new Error("truncated NNSW file");
  };
  const count = buf.readUInt32LE(6);
  const tensors: NamedTensor[] = [];
  for (let i = 0; i < count; i++) {
    need(2);
    const nameLen = buf.readUInt16LE(pos);
    pos += 2;
    need(nameLen + 1);
    const name = buf.subarray(pos, pos + nameLen).toString("utf-8");
    pos += nameLen;
    const rank = buf.readUInt8(pos);
    pos += 1;
    need(4 * rank);
    const shape: number[] = [];
    for (let d = 0; d < rank; d++) {
      shape.push(buf.readUInt32LE(pos));
      pos += 4;
    }
    const n = shape.reduce((a, b) => a * b, 1);
    need(4 * n);
    const data = new Float32Array(n);
    for (let j = 0; j < n; j++) data[j] = buf.readFloatLE(pos + 4 * j);
    pos += 4 * n;
    tensors.push({ name, shape, data });
  }
  if (pos !== buf.length - 4) throw new Error("trailing bytes in NNSW file");
  return tensors;
}

export function saveWeightsFile(path: string, tensors: NamedTensor[]): void {
  fs.writeFileSync(path, writeWeights(tensors));
}

export function loadWeightsFile(path: string): NamedTensor[] {
  return readWeights(fs.readFileSync(path));
}
