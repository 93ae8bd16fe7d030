import { describe, expect, it } from "vitest";

import { renderHeatmap } from "../src/figures/heatmap.js";
import { renderLossCurves } from "../src/figures/lossCurves.js";
import { renderSpectra } from "../src/figures/spectra.js";
import {
  makeDir,
  writeLossCsv,
  writeResultsCsv,
  writeSpectraCsv,
} from "./fixtures.js";

describe("loss curves", () => {
  it("renders mean lines and bands for two schemes", () => {
    const dir = makeDir();
    const a1 = writeLossCsv(dir, "a1.csv", [1, 0.5, 0.25]);
    const a2 = writeLossCsv(dir, "a2.csv", [1.2, 0.6, 0.3]);
    const b1 = writeLossCsv(dir, "b1.csv", [0.9, 0.3, 0.1]);
    const svg = renderLossCurves([
      { name: "baseline", paths: [a1, a2] },
      { name: "power-law", paths: [b1] },
    ]);
    expect(svg).toContain("<svg");
    expect(svg).toContain("baseline");
    expect(svg).toContain("power-law");
    // two mean polylines + two bands + axes
    expect((svg.match(/<path/g) ?? []).length).toBeGreaterThanOrEqual(4);
  });

  it("single-seed series produces a zero-width band", () => {
    const dir = makeDir();
    const a = writeLossCsv(dir, "a.csv", [1, 0.5]);
    const svg = renderLossCurves([{ name: "only", paths: [a] }]);
    // band path exists but upper == lower coordinates
    const band = svg.match(/<path d="(M[^"]+Z)"/);
    expect(band).not.toBeNull();
    const d = band![1];
    const coords = d.replace(" Z", "").split(/[ML]/).filter((s) => s.trim());
    const n = coords.length / 2;
    for (let i = 0; i < n; i++) {
      expect(coords[i].trim()).toBe(coords[coords.length - 1 - i].trim());
    }
  });

  it("rejects unequal seed histories", () => {
    const dir = makeDir();
    const a = writeLossCsv(dir, "a.csv", [1, 0.5]);
    const b = writeLossCsv(dir, "b.csv", [1]);
    expect(() => renderLossCurves([{ name: "x", paths: [a, b] }])).toThrow(
      /unequal lengths/,
    );
  });
});

describe("heatmap", () => {
  it("renders one cell per exponent pair with a log color scale", () => {
    const dir = makeDir();
    const rows = [];
    for (const alpha of [0, 1, 2]) {
      for (const beta of [0, 1, 2]) {
        for (const seed of [0, 1, 2]) {
          rows.push({
            alpha,
            beta,
            seed,
            final_loss: Math.pow(10, -(alpha + beta) - seed * 0.1),
          });
        }
      }
    }
    const path = writeResultsCsv(dir, "results.csv", rows);
    const svg = renderHeatmap(path, {});
    // 9 cells + 24 legend swatches + background
    const rects = (svg.match(/<rect/g) ?? []).length;
    expect(rects).toBe(1 + 9 + 24);
    expect(svg).toContain("alpha (residual exponent)");
    expect(svg).toContain("beta (basis exponent)");
  });

  it("filters by architecture", () => {
    const dir = makeDir();
    const path = writeResultsCsv(dir, "results.csv", [
      { alpha: 0, beta: 0, width: 2, final_loss: 1 },
      { alpha: 0, beta: 0, width: 4, final_loss: 2 },
    ]);
    const svg = renderHeatmap(path, { width: 4 });
    expect(svg).toContain("2.0e+0");
  });

  it("errors on empty selection", () => {
    const dir = makeDir();
    const path = writeResultsCsv(dir, "results.csv", [
      { scheme: "baseline", alpha: 0, beta: 0 },
    ]);
    expect(() => renderHeatmap(path, {})).toThrow(/empty selection/);
  });

  it("errors on missing columns", () => {
    const dir = makeDir();
    const bad = `${dir}/bad.csv`;
    require("node:fs").writeFileSync(bad, "task,scheme\nf1,power-law\n");
    expect(() => renderHeatmap(bad, {})).toThrow(/missing column/);
  });
});

describe("spectra", () => {
  it("renders one styled curve per iteration", () => {
    const dir = makeDir();
    const path = writeSpectraCsv(dir, "spectra.csv", [0, 25, 50, 75, 100], 16);
    const svg = renderSpectra(path, "fit");
    expect(svg).toContain("iter 0");
    expect(svg).toContain("iter 100");
    // solid for the first iteration, dotted (2 3) for the last,
    // dashed (6 4) for the middle three
    expect((svg.match(/stroke-dasharray="6 4"/g) ?? []).length).toBeGreaterThanOrEqual(3);
    expect((svg.match(/stroke-dasharray="2 3"/g) ?? []).length).toBeGreaterThanOrEqual(1);
  });

  it("rejects unknown blocks", () => {
    const dir = makeDir();
    const path = writeSpectraCsv(dir, "spectra.csv", [0], 4, "pde");
    expect(() => renderSpectra(path, "fit")).toThrow(/block 'fit' not in CSV/);
  });
});

describe("determinism", () => {
  it("renders byte-identical SVG on repeated runs", () => {
    const dir = makeDir();
    const a = writeLossCsv(dir, "a.csv", [1, 0.5, 0.2]);
    const res = writeResultsCsv(dir, "r.csv", [
      { alpha: 0, beta: 0, final_loss: 0.5 },
      { alpha: 1, beta: 0, final_loss: 0.1 },
    ]);
    const spec = writeSpectraCsv(dir, "s.csv", [0, 10], 8);
    for (const render of [
      () => renderLossCurves([{ name: "x", paths: [a] }]),
      () => renderHeatmap(res, {}),
      () => renderSpectra(spec, "fit"),
    ]) {
      expect(render()).toBe(render());
    }
  });
});
