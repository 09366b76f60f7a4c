/** IDX parsing and data-source resolution. */

import { describe, expect, test } from "vitest";

import {
  MnistUnavailableError,
  loadMnist,
  parseIdxImages,
  parseIdxLabels,
  pickDataDir,
} from "../src/mnist.js";

function idxImages(pixels: number[][], rows = 2, cols = 2): Buffer {
  const head = Buffer.alloc(16);
  head.writeUInt32BE(2051, 0);
  head.writeUInt32BE(pixels.length, 4);
  head.writeUInt32BE(rows, 8);
  head.writeUInt32BE(cols, 12);
  return Buffer.concat([head, Buffer.from(pixels.flat())]);
}

function idxLabels(labels: number[]): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(2049, 0);
  head.writeUInt32BE(labels.length, 4);
  return Buffer.concat([head, Buffer.from(labels)]);
}

describe("idx parsing", () => {
  test("images scale to [0, 1]", () => {
    const buf = idxImages([[0, 51, 102, 255], [255, 0, 255, 0]]);
    const out = parseIdxImages(buf);
    expect(out.length).toBe(8);
    expect(out[0]).toBe(0);
    expect(out[3]).toBe(1);
    expect(out[1]).toBe(Math.fround(51 / 255));
  });

  test("labels parse", () => {
    expect(Array.from(parseIdxLabels(idxLabels([3, 1, 9])))).toEqual([3, 1, 9]);
  });

  test("bad magic rejected", () => {
    const buf = idxImages([[0, 0, 0, 0]]);
    buf.writeUInt32BE(1234, 0);
    expect(() => parseIdxImages(buf)).toThrow(/magic/);
  });

  test("truncation rejected", () => {
    const buf = idxImages([[1, 2, 3, 4]]);
    expect(() => parseIdxImages(buf.subarray(0, buf.length - 1))).toThrow(/truncated/);
  });

  test("limit clamps the sample count", () => {
    const buf = idxImages([[1, 1, 1, 1], [2, 2, 2, 2], [3, 3, 3, 3]]);
    expect(parseIdxImages(buf, 2).length).toBe(8);
  });
});

describe("data resolution", () => {
  test("missing data fails with fetch instructions", () => {
    const attempt = () => pickDataDir(["/nonexistent-mnist", "/also-nonexistent"]);
    expect(attempt).toThrow(MnistUnavailableError);
    expect(attempt).toThrow(/train-images-idx3-ubyte/);
    expect(attempt).toThrow(/MNIST_DATA_DIR/);
    expect(attempt).toThrow(/mnist-data/);
  });

  test("bundled dataset loads when present", () => {
    let data;
    try {
      data = loadMnist(undefined, 200);
    } catch (err) {
      if (err instanceof MnistUnavailableError) return; // no data in this environment
      throw err;
    }
    expect(data.train.count).toBe(200);
    expect(data.test.count).toBe(10000);
    expect(data.train.images.length).toBe(200 * 784);
    let lo = Infinity, hi = -Infinity;
    for (const v of data.train.images) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
    expect(lo).toBeGreaterThanOrEqual(0);
    expect(hi).toBeLessThanOrEqual(1);
    for (const l of data.train.labels) {
      expect(l).toBeGreaterThanOrEqual(0);
      expect(l).toBeLessThanOrEqual(9);
    }
  });
});
