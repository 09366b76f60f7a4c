/** Sweep CSV parsing: per-trial rows, a blank line, then the summary
 * block (header `rber,mean,median,q1,q3,whisker_low,whisker_high,
 * outlier_count`).  A sibling .json mirror, when present, supplies the
 * uncorrupted baseline accuracy.
 */

import * as fs from "node:fs";

export const TRIAL_HEADER = "rber,trial,accuracy,flips";
export const SUMMARY_HEADER =
  "rber,mean,median,q1,q3,whisker_low,whisker_high,outlier_count";

export interface TrialRow {
  rber: number;
  trial: number;
  accuracy: number;
  flips: number;
}

export interface SummaryRow {
  rber: number;
  mean: number;
  median: number;
  q1: number;
  q3: number;
  whiskerLow: number;
  whiskerHigh: number;
  outlierCount: number;
}

export interface SweepData {
  path: string;
  trials: TrialRow[];
  summary: SummaryRow[];
  baseline?: number;
}

function parseNumbers(line: string, expect: number, where: string): number[] {
  const parts = line.split(",");
  if (parts.length !== expect) {
    throw new Error(`${where}: expected ${expect} fields, got ${parts.length} in "${line}"`);
  }
  const values = parts.map(Number);
  if (values.some((v) => Number.isNaN(v))) {
    throw new Error(`${where}: non-numeric field in "${line}"`);
  }
  return values;
}

export function parseSweepCsv(text: string, where = "sweep csv"): Omit<SweepData, "path"> {
  const sections = text.replace(/\r\n/g, "\n").trim().split("\n\n");
  if (sections.length !== 2) {
    throw new Error(`${where}: expected trial and summary sections separated by a blank line`);
  }
  const [trialLines, summaryLines] = sections.map((s) => s.split("\n"));
  if (trialLines[0] !== TRIAL_HEADER) {
    throw new Error(`${where}: bad trial header "${trialLines[0]}"`);
  }
  if (summaryLines[0] !== SUMMARY_HEADER) {
    throw new Error(`${where}: bad summary header "${summaryLines[0]}"`);
  }
  if (trialLines.length < 2 || summaryLines.length < 2) {
    throw new Error(`${where}: no data rows`);
  }
  const trials = trialLines.slice(1).map((line) => {
    const [rber, trial, accuracy, flips] = parseNumbers(line, 4, where);
    return { rber, trial, accuracy, flips };
  });
  const summary = summaryLines.slice(1).map((line) => {
    const v = parseNumbers(line, 8, where);
    return {
      rber: v[0],
      mean: v[1],
      median: v[2],
      q1: v[3],
      q3: v[4],
      whiskerLow: v[5],
      whiskerHigh: v[6],
      outlierCount: v[7],
    };
  });
  return { trials, summary };
}

/** Load a sweep CSV and, when available, the baseline from its JSON mirror
 * (falling back to the rber=0 summary mean). */
export function loadSweep(path: string): SweepData {
  const text = fs.readFileSync(path, "utf-8");
  const parsed = parseSweepCsv(text, path);
  let baseline: number | undefined;
  const jsonPath = path.replace(/\.csv$/, ".json");
  if (jsonPath !== path && fs.existsSync(jsonPath)) {
    const doc = JSON.parse(fs.readFileSync(jsonPath, "utf-8"));
    if (typeof doc.baseline_accuracy === "number") baseline = doc.baseline_accuracy;
  }
  if (baseline === undefined) {
    const zero = parsed.summary.find((row) => row.rber === 0);
    baseline = zero?.mean;
  }
  return { path, ...parsed, baseline };
}
