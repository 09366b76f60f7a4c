/** Export trained weights + manifest to an NNSB bundle file. */

import * as fs from "node:fs";

import { LayerDoc, Bundle, CodecOptions, RealTensor, buildBundle, bundleToBytes } from "./nnsb.js";
import { NamedTensor, loadWeightsFile } from "./weights.js";

export interface Manifest {
  layers: LayerDoc[];
  tensors: string[];
  metadata: Record<string, string>;
}

export function readManifest(path: string): Manifest {
  const doc = JSON.parse(fs.readFileSync(path, "utf-8"));
  if (!Array.isArray(doc.layers) || !Array.isArray(doc.tensors)) {
    throw new Error("manifest must list layers and tensors");
  }
  return {
    layers: doc.layers as LayerDoc[],
    tensors: doc.tensors as string[],
    metadata: Object.fromEntries(
      Object.entries(doc.metadata ?? {}).map(([k, v]) => [k, String(v)]),
    ),
  };
}

function referencedTensorNames(layers: LayerDoc[]): string[] {
  const names: string[] = [];
  for (const layer of layers) {
    if (layer.kind === "dense") names.push(layer.weights!, layer.bias!);
    if (layer.kind === "conv2d") names.push(layer.kernels!, layer.bias!);
  }
  return names;
}

/** Assemble the bundle for a (weights, manifest) pair. */
export function exportBundle(
  weights: NamedTensor[],
  manifest: Manifest,
  opts: CodecOptions,
): Bundle {
  const byName = new Map(weights.map((t) => [t.name, t]));
  for (const name of referencedTensorNames(manifest.layers)) {
    if (!byName.has(name)) {
      throw new Error(`manifest layer references missing tensor "${name}"`);
    }
  }
  const ordered: RealTensor[] = manifest.tensors.map((name) => {
    const t = byName.get(name);
    if (!t) throw new Error(`manifest tensor ${name} missing from weights file`);
    const n = t.shape.reduce((a, b) => a * b, 1);
    if (n !== t.data.length) {
      throw new Error(`tensor ${name}: shape ${t.shape} does not match ${t.data.length} values`);
    }
    const values = new Float64Array(t.data.length);
    for (let i = 0; i < t.data.length; i++) values[i] = t.data[i];
    return { name, shape: t.shape, values };
  });
  return buildBundle(manifest.layers, ordered, opts, manifest.metadata);
}

export function exportToFile(
  weightsPath: string,
  manifestPath: string,
  outPath: string,
  opts: CodecOptions,
): Bundle {
  const bundle = exportBundle(loadWeightsFile(weightsPath), readManifest(manifestPath), opts);
  fs.writeFileSync(outPath, bundleToBytes(bundle));
  return bundle;
}
