/**
 * Log-log figure of logical error rate per round against physical error rate.
 *
 * The figure is built in two stages so tests can check the numbers without
 * touching any rendering: buildFigure() turns CSV rows into a model whose
 * points carry both the original values and their pixel positions, and
 * renderSvg() serializes that model to a standalone SVG string.  Every data
 * point element carries the source values in data-* attributes.
 *
 * Grouping: one color per (code, layout) pair.  Within a pair, rows split
 * into one series per shift-noise ratio; the zero-shift-noise series is
 * drawn dashed so the paired comparison reads at a glance.  Reference
 * curves from the fitted-constants table are drawn behind the data for
 * every (code, layout) pair that has one.
 */

import { ResultRow } from "./csv.js";
import { hasReferenceCurve, referenceRate } from "./curves.js";

export interface Tick {
  value: number;
  pos: number;
  label: string;
}

export interface Axis {
  min: number;
  max: number;
  ticks: Tick[];
}

export interface SeriesPoint {
  p: number;
  pRound: number;
  ciLow: number;
  ciHigh: number;
  x: number;
  y: number;
  yLow: number;
  yHigh: number;
}

export interface Series {
  code: string;
  layout: string;
  tauS: number;
  color: string;
  dashed: boolean;
  label: string;
  points: SeriesPoint[];
}

export interface OverlayCurve {
  code: string;
  layout: string;
  color: string;
  path: Array<[number, number]>;
}

export interface FigureModel {
  width: number;
  height: number;
  plot: { left: number; top: number; right: number; bottom: number };
  x: Axis;
  y: Axis;
  series: Series[];
  overlays: OverlayCurve[];
  dropped: number;
}

const WIDTH = 860;
const HEIGHT = 560;
const PLOT = { left: 72, top: 44, right: 660, bottom: 500 };

const PALETTE = [
  "#4269d0", "#efb118", "#ff725c", "#6cc5b0",
  "#3ca951", "#ff8ab7", "#a463f2", "#97bbf5",
];

const OVERLAY_SAMPLES = 120;

function log10(v: number): number {
  return Math.log(v) / Math.LN10;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v > 0) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!Number.isFinite(lo)) {
    throw new Error("no positive values to place on a log axis");
  }
  return [lo, hi];
}

function pad(lo: number, hi: number, factor: number): [number, number] {
  if (lo === hi) {
    return [lo / 2, hi * 2];
  }
  return [lo / factor, hi * factor];
}

function fmtTick(value: number): string {
  const e = Math.floor(log10(value) + 1e-9);
  const mantissa = Math.round((value / Math.pow(10, e)) * 100) / 100;
  return mantissa === 1 ? `1e${e}` : `${mantissa}e${e}`;
}

function logTicks(lo: number, hi: number, scale: (v: number) => number): Tick[] {
  const eLo = Math.ceil(log10(lo) - 1e-9);
  const eHi = Math.floor(log10(hi) + 1e-9);
  const decades: number[] = [];
  for (let e = eLo; e <= eHi; e++) {
    decades.push(Math.pow(10, e));
  }
  let values = decades;
  if (decades.length < 3) {
    // narrow range: fill in 2x and 5x subdivisions so the axis stays readable
    values = [];
    for (let e = eLo - 1; e <= eHi; e++) {
      for (const m of [1, 2, 5]) {
        const v = m * Math.pow(10, e);
        if (v >= lo && v <= hi) {
          values.push(v);
        }
      }
    }
  }
  return values.map((v) => ({ value: v, pos: scale(v), label: fmtTick(v) }));
}

export function groupKey(row: { code: string; layout: string }): string {
  return `${row.code}/${row.layout}`;
}

export function buildFigure(rows: ResultRow[]): FigureModel {
  if (rows.length === 0) {
    throw new Error("no rows to plot");
  }
  const usable = rows.filter((r) => r.pRound > 0);
  const dropped = rows.length - usable.length;
  if (usable.length === 0) {
    throw new Error("every row has zero failures; nothing to place on a log axis");
  }

  const [pLo, pHi] = pad(...extent(usable.map((r) => r.p)), 1.3);
  const yValues = usable.flatMap((r) => [r.pRound, r.ciLow, r.ciHigh]);
  const [yLo, yHi] = pad(...extent(yValues), 1.6);

  const sx = (v: number): number =>
    PLOT.left +
    ((log10(v) - log10(pLo)) / (log10(pHi) - log10(pLo))) * (PLOT.right - PLOT.left);
  const sy = (v: number): number =>
    PLOT.bottom -
    ((log10(v) - log10(yLo)) / (log10(yHi) - log10(yLo))) * (PLOT.bottom - PLOT.top);

  const groups = new Map<string, ResultRow[]>();
  for (const row of usable) {
    const key = groupKey(row);
    const bucket = groups.get(key);
    if (bucket === undefined) {
      groups.set(key, [row]);
    } else {
      bucket.push(row);
    }
  }
  const groupOrder = [...groups.keys()].sort();
  const colorOf = new Map<string, string>();
  groupOrder.forEach((key, i) => colorOf.set(key, PALETTE[i % PALETTE.length]));

  const series: Series[] = [];
  for (const key of groupOrder) {
    const bucket = groups.get(key)!;
    const byTau = new Map<number, ResultRow[]>();
    for (const row of bucket) {
      const sub = byTau.get(row.tauS);
      if (sub === undefined) {
        byTau.set(row.tauS, [row]);
      } else {
        sub.push(row);
      }
    }
    const taus = [...byTau.keys()].sort((a, b) => b - a);
    for (const tau of taus) {
      const subset = byTau.get(tau)!.slice().sort((a, b) => a.p - b.p);
      const points: SeriesPoint[] = subset.map((r) => ({
        p: r.p,
        pRound: r.pRound,
        ciLow: r.ciLow,
        ciHigh: r.ciHigh,
        x: sx(r.p),
        y: sy(r.pRound),
        // Wilson lower bound can be 0 with few failures; pin it to the frame
        yLow: r.ciLow > 0 ? sy(r.ciLow) : PLOT.bottom,
        yHigh: sy(r.ciHigh),
      }));
      const [code, layout] = key.split("/");
      series.push({
        code,
        layout,
        tauS: tau,
        color: colorOf.get(key)!,
        dashed: tau === 0,
        label: `${code} ${layout} tau_s=${tau}`,
        points,
      });
    }
  }

  const overlays: OverlayCurve[] = [];
  for (const key of groupOrder) {
    const [code, layout] = key.split("/");
    if (!hasReferenceCurve(code, layout)) {
      continue;
    }
    const path: Array<[number, number]> = [];
    for (let i = 0; i <= OVERLAY_SAMPLES; i++) {
      const p = pLo * Math.pow(pHi / pLo, i / OVERLAY_SAMPLES);
      const rate = referenceRate(code, layout, p);
      if (rate > 0) {
        path.push([sx(p), sy(rate)]);
      }
    }
    overlays.push({ code, layout, color: colorOf.get(key)!, path });
  }

  return {
    width: WIDTH,
    height: HEIGHT,
    plot: PLOT,
    x: { min: pLo, max: pHi, ticks: logTicks(pLo, pHi, sx) },
    y: { min: yLo, max: yHi, ticks: logTicks(yLo, yHi, sy) },
    series,
    overlays,
    dropped,
  };
}

function r2(v: number): string {
  return (Math.round(v * 100) / 100).toString();
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderSvg(model: FigureModel): string {
  const { plot } = model;
  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${model.width}" ` +
      `height="${model.height}" viewBox="0 0 ${model.width} ${model.height}" ` +
      `font-family="system-ui, sans-serif" font-size="12">`,
  );
  out.push(`<rect width="${model.width}" height="${model.height}" fill="#ffffff"/>`);
  out.push(
    `<clipPath id="plot-clip"><rect x="${plot.left}" y="${plot.top}" ` +
      `width="${plot.right - plot.left}" height="${plot.bottom - plot.top}"/></clipPath>`,
  );

  // frame and grid
  for (const t of model.x.ticks) {
    out.push(
      `<line x1="${r2(t.pos)}" y1="${plot.top}" x2="${r2(t.pos)}" ` +
        `y2="${plot.bottom}" stroke="#e3e3e3"/>`,
    );
    out.push(
      `<text x="${r2(t.pos)}" y="${plot.bottom + 18}" text-anchor="middle" ` +
        `fill="#444444">${esc(t.label)}</text>`,
    );
  }
  for (const t of model.y.ticks) {
    out.push(
      `<line x1="${plot.left}" y1="${r2(t.pos)}" x2="${plot.right}" ` +
        `y2="${r2(t.pos)}" stroke="#e3e3e3"/>`,
    );
    out.push(
      `<text x="${plot.left - 8}" y="${r2(t.pos + 4)}" text-anchor="end" ` +
        `fill="#444444">${esc(t.label)}</text>`,
    );
  }
  out.push(
    `<rect x="${plot.left}" y="${plot.top}" width="${plot.right - plot.left}" ` +
      `height="${plot.bottom - plot.top}" fill="none" stroke="#555555"/>`,
  );
  out.push(
    `<text x="${(plot.left + plot.right) / 2}" y="${plot.bottom + 40}" ` +
      `text-anchor="middle" fill="#222222">physical error rate p</text>`,
  );
  out.push(
    `<text x="18" y="${(plot.top + plot.bottom) / 2}" text-anchor="middle" ` +
      `fill="#222222" transform="rotate(-90 18 ${(plot.top + plot.bottom) / 2})">` +
      `logical error rate per round</text>`,
  );
  out.push(
    `<text x="${(plot.left + plot.right) / 2}" y="26" text-anchor="middle" ` +
      `font-size="15" fill="#111111">memory performance by code and shuttling schedule</text>`,
  );

  // reference curves go behind the data
  for (const ov of model.overlays) {
    const d = ov.path
      .map(([x, y], i) => `${i === 0 ? "M" : "L"}${r2(x)} ${r2(y)}`)
      .join(" ");
    out.push(
      `<path class="overlay" data-overlay="${esc(`${ov.code}/${ov.layout}`)}" ` +
        `d="${d}" fill="none" stroke="${ov.color}" stroke-opacity="0.45" ` +
        `stroke-width="2.5" clip-path="url(#plot-clip)"/>`,
    );
  }

  for (const s of model.series) {
    const seriesId = `${s.code}/${s.layout}/tau${s.tauS}`;
    const dash = s.dashed ? ' stroke-dasharray="6 4"' : "";
    if (s.points.length > 1) {
      const d = s.points
        .map((pt, i) => `${i === 0 ? "M" : "L"}${r2(pt.x)} ${r2(pt.y)}`)
        .join(" ");
      out.push(
        `<path class="series" data-series="${esc(seriesId)}" d="${d}" ` +
          `fill="none" stroke="${s.color}" stroke-width="1.6"${dash} ` +
          `clip-path="url(#plot-clip)"/>`,
      );
    }
    for (const pt of s.points) {
      out.push(
        `<line class="ci" data-series="${esc(seriesId)}" x1="${r2(pt.x)}" ` +
          `y1="${r2(pt.yLow)}" x2="${r2(pt.x)}" y2="${r2(pt.yHigh)}" ` +
          `stroke="${s.color}" stroke-width="1" clip-path="url(#plot-clip)"/>`,
      );
      out.push(
        `<circle class="pt" data-series="${esc(seriesId)}" ` +
          `data-code="${esc(s.code)}" data-layout="${esc(s.layout)}" ` +
          `data-tau-s="${s.tauS}" data-p="${pt.p}" data-pl="${pt.pRound}" ` +
          `data-ci-low="${pt.ciLow}" data-ci-high="${pt.ciHigh}" ` +
          `cx="${r2(pt.x)}" cy="${r2(pt.y)}" r="4" fill="${s.color}" ` +
          `stroke="#ffffff" stroke-width="1"/>`,
      );
    }
  }

  // legend to the right of the plot area
  let ly = plot.top + 6;
  for (const s of model.series) {
    const dash = s.dashed ? ' stroke-dasharray="6 4"' : "";
    out.push(
      `<line x1="${plot.right + 14}" y1="${ly}" x2="${plot.right + 46}" ` +
        `y2="${ly}" stroke="${s.color}" stroke-width="2"${dash}/>`,
    );
    out.push(
      `<circle cx="${plot.right + 30}" cy="${ly}" r="3.5" fill="${s.color}"/>`,
    );
    out.push(
      `<text x="${plot.right + 52}" y="${ly + 4}" fill="#222222">${esc(s.label)}</text>`,
    );
    ly += 20;
  }
  if (model.overlays.length > 0) {
    out.push(
      `<line x1="${plot.right + 14}" y1="${ly}" x2="${plot.right + 46}" ` +
        `y2="${ly}" stroke="#888888" stroke-opacity="0.45" stroke-width="2.5"/>`,
    );
    out.push(
      `<text x="${plot.right + 52}" y="${ly + 4}" fill="#222222">fitted reference</text>`,
    );
  }

  out.push("</svg>");
  return out.join("\n");
}
