/** Sweep CSV parsing and SVG figure rendering. */

import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, test } from "vitest";

import { loadSweep, parseSweepCsv } from "../src/csv.js";
import { plotResults, renderBox, renderCurves } from "../src/plot.js";

const __dirname = path.dirname(fileURLToPath(import.meta.url));
const FIXTURES = path.join(__dirname, "..", "..", "fixtures");

const SAMPLE =
  "rber,trial,accuracy,flips\n" +
  "0.0,0,0.99,0\n0.0,1,0.99,0\n0.01,0,0.95,12\n0.01,1,0.91,15\n" +
  "\n" +
  "rber,mean,median,q1,q3,whisker_low,whisker_high,outlier_count\n" +
  "0.0,0.99,0.99,0.99,0.99,0.99,0.99,0\n" +
  "0.01,0.93,0.93,0.92,0.94,0.91,0.95,0\n";

describe("csv parsing", () => {
  test("parses both sections", () => {
    const parsed = parseSweepCsv(SAMPLE);
    expect(parsed.trials).toHaveLength(4);
    expect(parsed.summary).toHaveLength(2);
    expect(parsed.trials[2]).toEqual({ rber: 0.01, trial: 0, accuracy: 0.95, flips: 12 });
    expect(parsed.summary[1].mean).toBeCloseTo(0.93, 12);
  });

  test("rejects empty and malformed input", () => {
    expect(() => parseSweepCsv("")).toThrow();
    expect(() => parseSweepCsv("rber,trial\n1,2\n\nx\n")).toThrow(/header/);
    expect(() => parseSweepCsv(SAMPLE.replace("0.01,0,0.95,12", "a,b,c,d"))).toThrow(/non-numeric/);
    expect(() => parseSweepCsv(SAMPLE.split("\n\n")[0])).toThrow(/sections/);
  });

  test("fixture sweeps load with baseline from the json mirror", () => {
    const sweep = loadSweep(path.join(FIXTURES, "sweep_binary.csv"));
    expect(sweep.baseline).toBe(1.0);
    expect(sweep.summary[0].rber).toBe(0);
    expect(sweep.trials.length).toBe(sweep.summary.length * 20);
  });
});

describe("figure rendering", () => {
  test("curves include data, threshold line, and legend", () => {
    const a = loadSweep(path.join(FIXTURES, "sweep_binary.csv"));
    const b = loadSweep(path.join(FIXTURES, "sweep_hamming.csv"));
    const svg = renderCurves([a, b], { x: 0.95 });
    expect(svg).toContain("<svg");
    expect((svg.match(/class="curve"/g) ?? []).length).toBe(2);
    expect(svg).toContain('class="threshold"');
    expect(svg).toContain("sweep_binary");
    expect(svg).toContain("sweep_hamming");
    expect(svg).toContain("0.95 x baseline");
  });

  test("box plot draws one box per rate and marks outliers", () => {
    const sweep = loadSweep(path.join(FIXTURES, "sweep_binary.csv"));
    const svg = renderBox(sweep);
    expect((svg.match(/class="box"/g) ?? []).length).toBe(sweep.summary.length);
    const outliers = sweep.summary.reduce((acc, r) => acc + r.outlierCount, 0);
    expect((svg.match(/class="outlier"/g) ?? []).length).toBe(outliers);
  });

  test("single-rate csv renders a single box", () => {
    const one =
      "rber,trial,accuracy,flips\n0.01,0,0.9,3\n0.01,1,0.8,4\n\n" +
      "rber,mean,median,q1,q3,whisker_low,whisker_high,outlier_count\n" +
      "0.01,0.85,0.85,0.825,0.875,0.8,0.9,0\n";
    const svg = renderBox({ path: "one.csv", baseline: 0.9, ...parseSweepCsv(one) });
    expect((svg.match(/class="box"/g) ?? []).length).toBe(1);
  });

  test("plotResults writes figure files", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "figs-"));
    const outputs = plotResults(
      [path.join(FIXTURES, "sweep_binary.csv"), path.join(FIXTURES, "sweep_hamming.csv")],
      dir,
    );
    expect(fs.existsSync(outputs.curves)).toBe(true);
    expect(outputs.boxes).toHaveLength(2);
    for (const f of outputs.boxes) expect(fs.readFileSync(f, "utf-8")).toContain("<svg");
    expect(() => plotResults([], dir)).toThrow(/no CSV/);
  });
});
