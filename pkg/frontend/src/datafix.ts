/** Dataset fixture writer in the core toolkit's flat binary layout:
 * u32 count, u32 dims, count*dims float32 features, count u16 labels,
 * all little-endian. */

import * as fs from "node:fs";

export function writeDataset(images: Float32Array, labels: Int32Array, dims: number): Buffer {
  const count = labels.length;
  if (images.length !== count * dims) {
    throw new Error(`${images.length} features for ${count} x ${dims} dataset`);
  }
  const buf = Buffer.alloc(8 + count * dims * 4 + count * 2);
  buf.writeUInt32LE(count, 0);
  buf.writeUInt32LE(dims, 4);
  for (let i = 0; i < images.length; i++) buf.writeFloatLE(images[i], 8 + 4 * i);
  const base = 8 + count * dims * 4;
  for (let i = 0; i < count; i++) {
    if (labels[i] < 0 || labels[i] > 0xffff) throw new Error(`label ${labels[i]} out of u16 range`);
    buf.writeUInt16LE(labels[i], base + 2 * i);
  }
  return buf;
}

export function saveDataset(
  path: string, images: Float32Array, labels: Int32Array, dims: number,
): void {
  fs.writeFileSync(path, writeDataset(images, labels, dims));
}
