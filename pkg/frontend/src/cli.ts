#!/usr/bin/env node
/** Command-line entry points: train-mnist, export, plot. */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { exportToFile } from "./export.js";
import { CodecName } from "./nnsb.js";
import { plotResults } from "./plot.js";
import { DEFAULT_CONFIG, trainMnist } from "./train.js";

export function main(argv: string[]): Promise<unknown> {
  return yargs(argv)
    .scriptName("nnsb-frontend")
    .command(
      "train-mnist",
      "train the reference CNN on MNIST and save weights + manifest",
      (y) =>
        y
          .option("out-dir", { type: "string", demandOption: true })
          .option("data-dir", { type: "string", describe: "directory with the four IDX files" })
          .option("seed", { type: "number", default: DEFAULT_CONFIG.seed })
          .option("epochs", { type: "number", default: DEFAULT_CONFIG.epochs })
          .option("batch-size", { type: "number", default: DEFAULT_CONFIG.batchSize })
          .option("learning-rate", { type: "number", default: DEFAULT_CONFIG.learningRate })
          .option("lr-decay", {
            type: "number",
            default: DEFAULT_CONFIG.lrDecay,
            describe: "multiplicative learning-rate decay per epoch",
          })
          .option("train-size", { type: "number", default: DEFAULT_CONFIG.trainSize })
          .option("val-size", { type: "number", default: DEFAULT_CONFIG.valSize })
          .option("stop-at", {
            type: "number",
            default: DEFAULT_CONFIG.stopAt,
            describe: "stop once validation accuracy reaches this",
          })
          .option("eval-test", { type: "boolean", default: DEFAULT_CONFIG.evalTest })
          .option("resume", { type: "boolean", default: false }),
      (args) => {
        const result = trainMnist({
          outDir: args["out-dir"],
          dataDir: args["data-dir"],
          seed: args.seed,
          epochs: args.epochs,
          batchSize: args["batch-size"],
          learningRate: args["learning-rate"],
          lrDecay: args["lr-decay"],
          trainSize: args["train-size"],
          valSize: args["val-size"],
          stopAt: args["stop-at"],
          evalTest: args["eval-test"],
          resume: args.resume,
        });
        console.log(
          `done: ${result.epochsRun} epochs, val ${result.valAccuracy.toFixed(4)}` +
            (result.testAccuracy !== undefined
              ? `, test ${result.testAccuracy.toFixed(4)}`
              : "") +
            `\nweights: ${result.weightsPath}\nmanifest: ${result.manifestPath}`,
        );
      },
    )
    .command(
      "export",
      "quantize trained weights into an NNSB bundle",
      (y) =>
        y
          .option("weights", { type: "string", demandOption: true })
          .option("manifest", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true })
          .option("codec", {
            choices: ["binary", "gray", "hamming", "half"] as const,
            default: "binary" as CodecName,
          })
          .option("q", { type: "number", default: 16 })
          .option("parity", { type: "boolean", default: false })
          .option("grid-policy", {
            choices: ["per-tensor", "global"] as const,
            default: "per-tensor" as const,
          }),
      (args) => {
        const bundle = exportToFile(args.weights, args.manifest, args.out, {
          codec: args.codec,
          q: args.q,
          parity: args.parity,
          gridPolicy: args["grid-policy"],
        });
        const weights = bundle.tensors.reduce(
          (acc, t) => acc + t.shape.reduce((a, b) => a * b, 1),
          0,
        );
        console.log(
          `wrote ${args.out}: ${bundle.layers.length} layers, ` +
            `${bundle.tensors.length} tensors, ${weights} weights at q=${args.q}` +
            (args.parity ? " (+parity)" : ""),
        );
      },
    )
    .command(
      "plot <csv...>",
      "render accuracy curves and box plots from sweep CSV files",
      (y) =>
        y
          .positional("csv", { type: "string", array: true, demandOption: true })
          .option("out-dir", { type: "string", default: "figures" })
          .option("x", {
            type: "number",
            default: 0.95,
            describe: "accuracy-floor fraction for the dashed reference line",
          })
          .option("title", { type: "string" }),
      (args) => {
        const outputs = plotResults(args.csv as string[], args["out-dir"], {
          x: args.x,
          title: args.title,
        });
        console.log(`wrote ${outputs.curves}`);
        for (const box of outputs.boxes) console.log(`wrote ${box}`);
      },
    )
    .demandCommand(1)
    .strict()
    .help()
    .parseAsync();
}

const isMain =
  process.argv[1] &&
  (import.meta.url.endsWith(process.argv[1]) ||
    import.meta.url === `file://${process.argv[1]}`);
if (isMain) {
  main(hideBin(process.argv)).catch((err) => {
    console.error(err instanceof Error ? err.message : err);
    process.exit(1);
  });
}
