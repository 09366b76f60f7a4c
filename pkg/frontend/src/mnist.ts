/** MNIST IDX loading with a clear failure mode when data is missing.
 *
 * Search order for the four IDX files: an explicit directory, the
 * MNIST_DATA_DIR environment variable, ./data next to the package, and
 * finally the data shipped inside the `mnist-data` npm package.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { createRequire } from "node:module";

export interface MnistSplit {
  images: Float32Array; // count x 784, scaled to [0, 1]
  labels: Int32Array;
  count: number;
}

export interface MnistData {
  train: MnistSplit;
  test: MnistSplit;
  source: string;
}

export const IDX_FILES = {
  trainImages: "train-images-idx3-ubyte",
  trainLabels: "train-labels-idx1-ubyte",
  testImages: "t10k-images-idx3-ubyte",
  testLabels: "t10k-labels-idx1-ubyte",
} as const;

export class MnistUnavailableError extends Error {}

function hasAllFiles(dir: string): boolean {
  return Object.values(IDX_FILES).every((f) => fs.existsSync(path.join(dir, f)));
}

function mnistDataPackageDir(): string | undefined {
  try {
    const require = createRequire(import.meta.url);
    const pkg = require.resolve("mnist-data/package.json");
    return path.join(path.dirname(pkg), "data");
  } catch {
    return undefined;
  }
}

/** First candidate directory holding all four IDX files, or a clear
 * failure explaining how to fetch them. */
export function pickDataDir(candidates: string[]): string {
  for (const dir of candidates) {
    if (hasAllFiles(dir)) return dir;
  }
  throw new MnistUnavailableError(
    "MNIST IDX files not found. Looked in: " +
      candidates.join(", ") +
      ". Fetch the four files " +
      Object.values(IDX_FILES).join(", ") +
      " (e.g. from https://yann.lecun.com/exdb/mnist/ or " +
      "https://storage.googleapis.com/cvdf-datasets/mnist/, gunzip them) " +
      "into a directory and pass --data-dir or set MNIST_DATA_DIR; " +
      "alternatively `npm install mnist-data` provides them.",
  );
}

export function resolveDataDir(explicit?: string): string {
  const candidates = [
    explicit,
    process.env.MNIST_DATA_DIR,
    path.join(process.cwd(), "data"),
    mnistDataPackageDir(),
  ].filter((d): d is string => !!d);
  return pickDataDir(candidates);
}

export function parseIdxImages(buf: Buffer, limit?: number): Float32Array {
  if (buf.readUInt32BE(0) !== 2051) {
    throw new Error(`bad IDX image magic ${buf.readUInt32BE(0)}`);
  }
  const count = Math.min(buf.readUInt32BE(4), limit ?? Infinity);
  const rows = buf.readUInt32BE(8);
  const cols = buf.readUInt32BE(12);
  const pixels = count * rows * cols;
  if (buf.length < 16 + pixels) throw new Error("truncated IDX image file");
  const out = new Float32Array(pixels);
  for (let i = 0; i < pixels; i++) out[i] = buf[16 + i] / 255;
  return out;
}

export function parseIdxLabels(buf: Buffer, limit?: number): Int32Array {
  if (buf.readUInt32BE(0) !== 2049) {
    throw new Error(`bad IDX label magic ${buf.readUInt32BE(0)}`);
  }
  const count = Math.min(buf.readUInt32BE(4), limit ?? Infinity);
  if (buf.length < 8 + count) throw new Error("truncated IDX label file");
  const out = new Int32Array(count);
  for (let i = 0; i < count; i++) out[i] = buf[8 + i];
  return out;
}

export function loadMnist(explicitDir?: string, trainLimit?: number): MnistData {
  const dir = resolveDataDir(explicitDir);
  const read = (f: string) => fs.readFileSync(path.join(dir, f));
  const trainImages = parseIdxImages(read(IDX_FILES.trainImages), trainLimit);
  const trainLabels = parseIdxLabels(read(IDX_FILES.trainLabels), trainLimit);
  const testImages = parseIdxImages(read(IDX_FILES.testImages));
  const testLabels = parseIdxLabels(read(IDX_FILES.testLabels));
  return {
    train: {
      images: trainImages,
      labels: trainLabels,
      count: trainLabels.length,
    },
    test: { images: testImages, labels: testLabels, count: testLabels.length },
    source: dir,
  };
}
