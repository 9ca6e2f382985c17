import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { parseResults, ResultRow } from "../src/csv.js";
import { referenceRate } from "../src/curves.js";
import { buildFigure, groupKey, renderSvg } from "../src/figure.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixturePath = join(here, "fixtures", "golden.csv");
const rows = parseResults(readFileSync(fixturePath, "utf8"));
const model = buildFigure(rows);
const svg = renderSvg(model);

describe("buildFigure", () => {
  it("makes one dashed/solid series pair per shift-noise split", () => {
    const labels = model.series.map((s) => `${groupKey(s)}/tau${s.tauS}`);
    expect(labels.sort()).toEqual([
      "bb72/flat/tau30",
      "bb72/sparse/tau0",
      "bb72/sparse/tau30",
    ]);
    for (const s of model.series) {
      expect(s.dashed).toBe(s.tauS === 0);
    }
  });

  it("shares one color per (code, layout) group", () => {
    const byGroup = new Map<string, Set<string>>();
    for (const s of model.series) {
      const colors = byGroup.get(groupKey(s)) ?? new Set();
      colors.add(s.color);
      byGroup.set(groupKey(s), colors);
    }
    for (const colors of byGroup.values()) {
      expect(colors.size).toBe(1);
    }
    const distinct = new Set(model.series.map((s) => s.color));
    expect(distinct.size).toBe(byGroup.size);
  });

  it("carries every CSV value through to the series points unchanged", () => {
    const want = new Map<string, ResultRow>();
    for (const row of rows) {
      want.set(`${groupKey(row)}/${row.tauS}/${row.p}`, row);
    }
    let seen = 0;
    for (const s of model.series) {
      for (const pt of s.points) {
        const row = want.get(`${groupKey(s)}/${s.tauS}/${pt.p}`);
        expect(row).toBeDefined();
        expect(pt.pRound).toBe(row!.pRound);
        expect(pt.ciLow).toBe(row!.ciLow);
        expect(pt.ciHigh).toBe(row!.ciHigh);
        seen += 1;
      }
    }
    expect(seen).toBe(rows.length);
  });

  it("orients the log-log axes the usual way", () => {
    for (const s of model.series) {
      for (let i = 1; i < s.points.length; i++) {
        expect(s.points[i].p).toBeGreaterThan(s.points[i - 1].p);
        expect(s.points[i].x).toBeGreaterThan(s.points[i - 1].x);
        // higher error rate sits higher on the frame, so smaller pixel y
        expect(s.points[i].y).toBeLessThan(s.points[i - 1].y);
      }
      for (const pt of s.points) {
        expect(pt.yHigh).toBeLessThanOrEqual(pt.y);
        expect(pt.yLow).toBeGreaterThanOrEqual(pt.y);
      }
    }
    const xt = model.x.ticks.map((t) => t.pos);
    expect(xt).toEqual([...xt].sort((a, b) => a - b));
  });

  it("draws one reference overlay per group in the group color", () => {
    const got = model.overlays.map((ov) => `${ov.code}/${ov.layout}`).sort();
    expect(got).toEqual(["bb72/flat", "bb72/sparse"]);
    for (const ov of model.overlays) {
      const mates = model.series.filter(
        (s) => s.code === ov.code && s.layout === ov.layout,
      );
      expect(mates.length).toBeGreaterThan(0);
      expect(mates[0].color).toBe(ov.color);
      expect(ov.path.length).toBeGreaterThan(100);
    }
  });

  it("evaluates the fitted reference constants", () => {
    expect(referenceRate("bb72", "sparse", 0.004)).toBeCloseTo(
      0.052572255856751376, 15,
    );
    expect(referenceRate("bb72", "flat", 0.004)).toBeCloseTo(
      0.03209192771297936, 15,
    );
    expect(() => referenceRate("bb72", "interleaved-gates", 0.004)).toThrow(
      /no reference curve/,
    );
  });
});

describe("renderSvg", () => {
  it("emits a well-formed standalone figure", () => {
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg.endsWith("</svg>")).toBe(true);
    expect(svg).toContain("physical error rate p");
    expect(svg).toContain("logical error rate per round");
  });

  it("puts the exact CSV values on every point element", () => {
    const circles = [...svg.matchAll(/<circle class="pt" ([^>]*)\/>/g)];
    expect(circles).toHaveLength(rows.length);
    const attr = (text: string, name: string): string => {
      const m = text.match(new RegExp(`${name}="([^"]*)"`));
      expect(m).not.toBeNull();
      return m![1];
    };
    const want = new Map<string, ResultRow>();
    for (const row of rows) {
      want.set(`${row.code}/${row.layout}/${row.tauS}/${row.p}`, row);
    }
    for (const [, attrs] of circles) {
      const key = [
        attr(attrs, "data-code"),
        attr(attrs, "data-layout"),
        attr(attrs, "data-tau-s"),
        attr(attrs, "data-p"),
      ].join("/");
      const row = want.get(key);
      expect(row).toBeDefined();
      expect(Number(attr(attrs, "data-pl"))).toBe(row!.pRound);
      expect(Number(attr(attrs, "data-ci-low"))).toBe(row!.ciLow);
      expect(Number(attr(attrs, "data-ci-high"))).toBe(row!.ciHigh);
    }
  });

  it("dashes exactly the zero-shift-noise series", () => {
    const seriesPaths = [...svg.matchAll(/<path class="series" ([^>]*)\/>/g)];
    expect(seriesPaths).toHaveLength(3);
    for (const [, attrs] of seriesPaths) {
      const id = attrs.match(/data-series="([^"]*)"/)![1];
      const dashed = attrs.includes("stroke-dasharray");
      expect(dashed).toBe(id.endsWith("/tau0"));
    }
  });

  it("includes the overlay paths and the legend", () => {
    expect(svg).toContain('data-overlay="bb72/sparse"');
    expect(svg).toContain('data-overlay="bb72/flat"');
    expect(svg).toContain("bb72 sparse tau_s=30");
    expect(svg).toContain("bb72 sparse tau_s=0");
    expect(svg).toContain("bb72 flat tau_s=30");
    expect(svg).toContain("fitted reference");
  });
});

describe("plot script", () => {
  it("consumes the golden CSV and writes the figure", () => {
    const outPath = join(mkdtempSync(join(tmpdir(), "plots-")), "golden.svg");
    const script = join(here, "..", "dist", "plot.js");
    const stdout = execFileSync(process.execPath, [script, fixturePath, outPath], {
      encoding: "utf8",
    });
    expect(stdout).toContain("3 series");
    expect(stdout).toContain("2 reference curves");
    const written = readFileSync(outPath, "utf8");
    expect(written.trimEnd()).toBe(svg);
  });
});
