/** SVG figure rendering for sweep results: mean accuracy-vs-RBER curves
 * (with the x*A reference line dashed) and per-rate box plots with
 * 1.5-IQR whiskers and outlier markers.  Pure string assembly, no DOM.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { SweepData, loadSweep } from "./csv.js";

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 70, right: 24, top: 36, bottom: 56 };
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

interface Scale {
  (v: number): number;
}

function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  return (v: number) => outLo + ((v - lo) / span) * (outHi - outLo);
}

function ticks(lo: number, hi: number, n = 6): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const inc = mult * step;
  const start = Math.ceil(lo / inc) * inc;
  const out: number[] = [];
  for (let v = start; v <= hi + inc / 1e6; v += inc) out.push(Number(v.toPrecision(10)));
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) return String(Number(v.toPrecision(6)));
  return v.toExponential(1).replace("e-", "e-").replace("e+", "e");
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function axes(
  x: Scale, y: Scale, xTicks: number[], yTicks: number[],
  xLabel: string, yLabel: string, title: string,
): string {
  const parts: string[] = [];
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(`<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(`<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-size="15" font-weight="bold">${esc(title)}</text>`);
  for (const t of xTicks) {
    const px = x(t);
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y1}" stroke="#eee"/>`);
    parts.push(`<text x="${px}" y="${y0 + 18}" text-anchor="middle" font-size="11">${fmt(t)}</text>`);
  }
  for (const t of yTicks) {
    const py = y(t);
    parts.push(`<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="#eee"/>`);
    parts.push(`<text x="${x0 - 6}" y="${py + 4}" text-anchor="end" font-size="11">${fmt(t)}</text>`);
  }
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`);
  parts.push(`<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="13">${esc(xLabel)}</text>`);
  parts.push(`<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 18 ${(y0 + y1) / 2})">${esc(yLabel)}</text>`);
  return parts.join("\n");
}

function svgDoc(body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">\n${body}\n</svg>\n`
  );
}

export interface CurveOptions {
  /** Accuracy-floor fraction for the reference line (default 0.95). */
  x?: number;
  title?: string;
}

/** Overlaid mean-accuracy curves, one per sweep, with the x*A floor dashed. */
export function renderCurves(sweeps: SweepData[], options: CurveOptions = {}): string {
  if (!sweeps.length) throw new Error("no sweeps to plot");
  const frac = options.x ?? 0.95;
  const rates = sweeps.flatMap((s) => s.summary.map((r) => r.rber));
  const accs = sweeps.flatMap((s) => s.summary.map((r) => r.mean));
  const baseline = sweeps[0].baseline;
  const floor = baseline !== undefined ? baseline * frac : undefined;
  const yLo = Math.min(...accs, floor ?? 1) - 0.02;
  const yHi = Math.max(...accs, 1.0);
  const x = linearScale(Math.min(...rates), Math.max(...rates), MARGIN.left, WIDTH - MARGIN.right);
  const y = linearScale(yLo, yHi, HEIGHT - MARGIN.bottom, MARGIN.top);

  const parts: string[] = [];
  parts.push(axes(
    x, y, ticks(Math.min(...rates), Math.max(...rates)), ticks(yLo, yHi),
    "raw bit-error rate", "mean accuracy",
    options.title ?? "Accuracy vs raw bit-error rate",
  ));
  if (floor !== undefined) {
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y(floor)}" x2="${WIDTH - MARGIN.right}" y2="${y(floor)}" ` +
      `stroke="#555" stroke-dasharray="7,5" class="threshold"/>`,
    );
    parts.push(
      `<text x="${WIDTH - MARGIN.right - 4}" y="${y(floor) - 6}" text-anchor="end" ` +
      `font-size="11" fill="#555">${fmt(frac)} x baseline</text>`,
    );
  }
  sweeps.forEach((sweep, i) => {
    const color = COLORS[i % COLORS.length];
    const pts = sweep.summary.map((r) => `${x(r.rber)},${y(r.mean)}`).join(" ");
    parts.push(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="2" class="curve"/>`);
    for (const r of sweep.summary) {
      parts.push(`<circle cx="${x(r.rber)}" cy="${y(r.mean)}" r="3" fill="${color}"/>`);
    }
    const label = path.basename(sweep.path).replace(/\.csv$/, "");
    const ly = MARGIN.top + 16 + i * 18;
    parts.push(`<line x1="${MARGIN.left + 10}" y1="${ly - 4}" x2="${MARGIN.left + 34}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${MARGIN.left + 40}" y="${ly}" font-size="12" class="legend">${esc(label)}</text>`);
  });
  return svgDoc(parts.join("\n"));
}

/** Box plot of per-trial accuracies per rate: IQR box, median line,
 * whiskers at the most extreme samples within 1.5 IQR, outlier dots. */
export function renderBox(sweep: SweepData, title?: string): string {
  const rows = sweep.summary;
  if (!rows.length) throw new Error("no summary rows to plot");
  const lows = rows.map((r) => Math.min(r.whiskerLow, ...outliersOf(sweep, r.rber)));
  const highs = rows.map((r) => Math.max(r.whiskerHigh, ...outliersOf(sweep, r.rber)));
  const yLo = Math.min(...lows) - 0.02;
  const yHi = Math.max(...highs, 1.0);
  const y = linearScale(yLo, yHi, HEIGHT - MARGIN.bottom, MARGIN.top);
  const slot = (WIDTH - MARGIN.left - MARGIN.right) / rows.length;
  const boxW = Math.min(40, slot * 0.5);

  const parts: string[] = [];
  const yTicks = ticks(yLo, yHi);
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  parts.push(`<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(`<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-size="15" font-weight="bold">${esc(title ?? "Accuracy distribution per raw bit-error rate")}</text>`);
  for (const t of yTicks) {
    parts.push(`<line x1="${x0}" y1="${y(t)}" x2="${x1}" y2="${y(t)}" stroke="#eee"/>`);
    parts.push(`<text x="${x0 - 6}" y="${y(t) + 4}" text-anchor="end" font-size="11">${fmt(t)}</text>`);
  }
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${MARGIN.top}" stroke="black"/>`);
  parts.push(`<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="13">raw bit-error rate</text>`);
  parts.push(`<text x="18" y="${(y0 + MARGIN.top) / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 18 ${(y0 + MARGIN.top) / 2})">accuracy</text>`);

  rows.forEach((r, i) => {
    const cx = MARGIN.left + slot * (i + 0.5);
    parts.push(`<line x1="${cx}" y1="${y(r.whiskerLow)}" x2="${cx}" y2="${y(r.q1)}" stroke="black"/>`);
    parts.push(`<line x1="${cx}" y1="${y(r.q3)}" x2="${cx}" y2="${y(r.whiskerHigh)}" stroke="black"/>`);
    parts.push(`<line x1="${cx - boxW / 4}" y1="${y(r.whiskerLow)}" x2="${cx + boxW / 4}" y2="${y(r.whiskerLow)}" stroke="black"/>`);
    parts.push(`<line x1="${cx - boxW / 4}" y1="${y(r.whiskerHigh)}" x2="${cx + boxW / 4}" y2="${y(r.whiskerHigh)}" stroke="black"/>`);
    parts.push(
      `<rect x="${cx - boxW / 2}" y="${y(r.q3)}" width="${boxW}" ` +
      `height="${Math.max(y(r.q1) - y(r.q3), 0.5)}" fill="#9ecae1" stroke="black" class="box"/>`,
    );
    parts.push(`<line x1="${cx - boxW / 2}" y1="${y(r.median)}" x2="${cx + boxW / 2}" y2="${y(r.median)}" stroke="black" stroke-width="2"/>`);
    for (const o of outliersOf(sweep, r.rber)) {
      parts.push(`<circle cx="${cx}" cy="${y(o)}" r="2.5" fill="none" stroke="#d62728" class="outlier"/>`);
    }
    parts.push(`<text x="${cx}" y="${y0 + 18}" text-anchor="middle" font-size="11">${fmt(r.rber)}</text>`);
  });
  return svgDoc(parts.join("\n"));
}

/** Trial accuracies at a rate that fall outside the whiskers. */
function outliersOf(sweep: SweepData, rber: number): number[] {
  const row = sweep.summary.find((r) => r.rber === rber);
  if (!row) return [];
  return sweep.trials
    .filter((t) => t.rber === rber)
    .map((t) => t.accuracy)
    .filter((a) => a < row.whiskerLow || a > row.whiskerHigh);
}

export interface PlotOutputs {
  curves: string;
  boxes: string[];
}

/** Render every figure for the given sweep CSVs into an output directory. */
export function plotResults(csvPaths: string[], outDir: string, options: CurveOptions = {}): PlotOutputs {
  if (!csvPaths.length) throw new Error("no CSV files given");
  const sweeps = csvPaths.map(loadSweep);
  fs.mkdirSync(outDir, { recursive: true });
  const curves = path.join(outDir, "curves.svg");
  fs.writeFileSync(curves, renderCurves(sweeps, options));
  const boxes: string[] = [];
  for (const sweep of sweeps) {
    const stem = path.basename(sweep.path).replace(/\.csv$/, "");
    const file = path.join(outDir, `box_${stem}.svg`);
    fs.writeFileSync(file, renderBox(sweep, `Accuracy distribution: ${stem}`));
    boxes.push(file);
  }
  return { curves, boxes };
}
