/** Training-loss curves with standard-error bands across seeds. */

import { numericColumn, readCsv } from "../csv.js";
import { linearScale, log10Scale, tickLabel } from "../scale.js";
import { PALETTE, SvgDoc, bandPath, polylinePath } from "../svg.js";
import { mean, standardError } from "../stats.js";

export interface SeriesSpec {
  name: string;
  paths: string[];
}

export interface LossCurveOptions {
  width?: number;
  height?: number;
  title?: string;
}

interface SeriesData {
  name: string;
  epochs: number[];
  mean: number[];
  lo: number[];
  hi: number[];
}

function loadSeries(spec: SeriesSpec): SeriesData {
  if (spec.paths.length === 0) throw new Error(`series '${spec.name}' has no CSVs`);
  const runs = spec.paths.map((p) => {
    const table = readCsv(p);
    return { epochs: numericColumn(table, "epoch"), loss: numericColumn(table, "loss") };
  });
  const n = runs[0].epochs.length;
  if (n === 0) throw new Error(`series '${spec.name}' is empty`);
  for (const run of runs) {
    if (run.epochs.length !== n) {
      throw new Error(`series '${spec.name}': seed histories have unequal lengths`);
    }
  }
  const epochs = runs[0].epochs;
  const m: number[] = [];
  const lo: number[] = [];
  const hi: number[] = [];
  for (let i = 0; i < n; i++) {
    const vals = runs.map((r) => r.loss[i]);
    const mu = mean(vals);
    const se = standardError(vals);
    m.push(mu);
    // keep the band inside the log domain
    lo.push(Math.max(mu - se, mu * 1e-3));
    hi.push(mu + se);
  }
  return { name: spec.name, epochs, mean: m, lo, hi };
}

export function renderLossCurves(
  specs: SeriesSpec[],
  options: LossCurveOptions = {},
): string {
  if (specs.length === 0) throw new Error("no series given");
  const series = specs.map(loadSeries);
  const width = options.width ?? 640;
  const height = options.height ?? 420;
  const margin = { top: 36, right: 16, bottom: 44, left: 64 };

  const allLoss = series.flatMap((s) => [...s.hi, ...s.lo]).filter((v) => v > 0);
  if (allLoss.length === 0) throw new Error("no positive loss values to plot");
  const yMin = Math.min(...allLoss);
  const yMax = Math.max(...allLoss);
  const xMax = Math.max(...series.map((s) => s.epochs[s.epochs.length - 1]));
  const x = linearScale([0, xMax], [margin.left, width - margin.right]);
  const y = log10Scale(
    [yMin, yMax === yMin ? yMin * 10 : yMax],
    [height - margin.bottom, margin.top],
  );

  const doc = new SvgDoc(width, height);
  drawAxes(doc, x, y, width, height, margin, "epoch", "training loss");
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const px = s.epochs.map((e) => x(e));
    doc.path(
      bandPath(px, s.hi.map((v) => y(v)), s.lo.map((v) => y(v))),
      `fill="${color}" fill-opacity="0.18" stroke="none"`,
    );
    doc.path(
      polylinePath(px, s.mean.map((v) => y(v))),
      `fill="none" stroke="${color}" stroke-width="1.6"`,
    );
    const ly = margin.top + 16 * i + 4;
    doc.line(width - margin.right - 120, ly, width - margin.right - 96, ly, `stroke="${color}" stroke-width="1.6"`);
    doc.text(width - margin.right - 90, ly + 4, s.name, `font-size="12"`);
  });
  if (options.title) {
    doc.text(width / 2, 20, options.title, `font-size="14" text-anchor="middle"`);
  }
  return doc.render();
}

export function drawAxes(
  doc: SvgDoc,
  x: ReturnType<typeof linearScale>,
  y: ReturnType<typeof log10Scale>,
  width: number,
  height: number,
  margin: { top: number; right: number; bottom: number; left: number },
  xLabel: string,
  yLabel: string,
): void {
  const axisStyle = `stroke="#333" stroke-width="1"`;
  doc.line(margin.left, height - margin.bottom, width - margin.right, height - margin.bottom, axisStyle);
  doc.line(margin.left, margin.top, margin.left, height - margin.bottom, axisStyle);
  for (const t of x.ticks()) {
    const px = x(t);
    doc.line(px, height - margin.bottom, px, height - margin.bottom + 4, axisStyle);
    doc.text(px, height - margin.bottom + 16, tickLabel(t), `font-size="10" text-anchor="middle"`);
  }
  for (const t of y.ticks()) {
    const py = y(t);
    doc.line(margin.left - 4, py, margin.left, py, axisStyle);
    doc.text(margin.left - 6, py + 3, tickLabel(t), `font-size="10" text-anchor="end"`);
  }
  doc.text(
    (margin.left + width - margin.right) / 2,
    height - 8,
    xLabel,
    `font-size="12" text-anchor="middle"`,
  );
  doc.raw(
    `<text x="14" y="${(margin.top + height - margin.bottom) / 2}" font-size="12" ` +
      `text-anchor="middle" transform="rotate(-90 14 ${(margin.top + height - margin.bottom) / 2})">${yLabel}</text>`,
  );
}
