/** Exponent-pair heatmap: alpha horizontal, beta vertical, color = final
 * training loss (log scale), medians across seeds per cell. */

import { Table, column, numericColumn, readCsv } from "../csv.js";
import { SvgDoc, lossColor } from "../svg.js";
import { lowerMedian } from "../stats.js";
import { tickLabel } from "../scale.js";

export interface HeatmapFilter {
  task?: string;
  depth?: number;
  width?: number;
  gridSize?: number;
}

export interface HeatmapOptions {
  cellSize?: number;
  title?: string;
}

interface CellTable {
  alphas: number[];
  betas: number[];
  median: Map<string, number>;
  task: string;
}

export function collectCells(table: Table, filter: HeatmapFilter): CellTable {
  const tasks = column(table, "task");
  const scheme = column(table, "scheme");
  const depth = numericColumn(table, "depth");
  const width = numericColumn(table, "width");
  const g = numericColumn(table, "G");
  const alpha = numericColumn(table, "alpha");
  const beta = numericColumn(table, "beta");
  const loss = numericColumn(table, "final_loss");

  const byCell = new Map<string, number[]>();
  const alphas = new Set<number>();
  const betas = new Set<number>();
  let taskSeen = "";
  for (let i = 0; i < table.rows.length; i++) {
    if (scheme[i] !== "power-law") continue;
    if (filter.task !== undefined && tasks[i] !== filter.task) continue;
    if (filter.depth !== undefined && depth[i] !== filter.depth) continue;
    if (filter.width !== undefined && width[i] !== filter.width) continue;
    if (filter.gridSize !== undefined && g[i] !== filter.gridSize) continue;
    taskSeen = tasks[i];
    alphas.add(alpha[i]);
    betas.add(beta[i]);
    const key = `${alpha[i]}|${beta[i]}`;
    const bucket = byCell.get(key) ?? [];
    bucket.push(loss[i]);
    byCell.set(key, bucket);
  }
  if (byCell.size === 0) {
    throw new Error("empty selection: no power-law rows match the filter");
  }
  const median = new Map<string, number>();
  for (const [key, vals] of byCell) {
    median.set(key, lowerMedian(vals));
  }
  return {
    alphas: [...alphas].sort((a, b) => a - b),
    betas: [...betas].sort((a, b) => a - b),
    median,
    task: taskSeen,
  };
}

export function renderHeatmap(
  resultsPath: string,
  filter: HeatmapFilter,
  options: HeatmapOptions = {},
): string {
  const cells = collectCells(readCsv(resultsPath), filter);
  const cellSize = options.cellSize ?? 46;
  const margin = { top: 40, right: 120, bottom: 52, left: 64 };
  const gridW = cells.alphas.length * cellSize;
  const gridH = cells.betas.length * cellSize;
  const width = margin.left + gridW + margin.right;
  const height = margin.top + gridH + margin.bottom;

  const finite = [...cells.median.values()].filter((v) => Number.isFinite(v) && v > 0);
  if (finite.length === 0) throw new Error("no finite positive losses to color");
  const logMin = Math.log10(Math.min(...finite));
  const logMax = Math.log10(Math.max(...finite));

  const doc = new SvgDoc(width, height);
  // beta grows upward, alpha rightward
  cells.alphas.forEach((a, i) => {
    cells.betas.forEach((b, j) => {
      const v = cells.median.get(`${a}|${b}`);
      const px = margin.left + i * cellSize;
      const py = margin.top + (cells.betas.length - 1 - j) * cellSize;
      if (v === undefined) {
        doc.rect(px, py, cellSize, cellSize, `fill="#eee" stroke="#999" stroke-width="0.5"`);
        return;
      }
      const fill =
        Number.isFinite(v) && v > 0
          ? lossColor(Math.log10(v), logMin, logMax)
          : "#b71c1c"; // diverged / non-positive marker
      doc.rect(px, py, cellSize, cellSize, `fill="${fill}" stroke="#555" stroke-width="0.5"`);
      if (cells.alphas.length * cells.betas.length <= 36) {
        doc.text(
          px + cellSize / 2,
          py + cellSize / 2 + 3,
          Number.isFinite(v) ? v.toExponential(1) : "div",
          `font-size="9" text-anchor="middle" fill="#111"`,
        );
      }
    });
  });
  cells.alphas.forEach((a, i) => {
    doc.text(
      margin.left + i * cellSize + cellSize / 2,
      margin.top + gridH + 16,
      tickLabel(a),
      `font-size="11" text-anchor="middle"`,
    );
  });
  cells.betas.forEach((b, j) => {
    doc.text(
      margin.left - 8,
      margin.top + (cells.betas.length - 1 - j) * cellSize + cellSize / 2 + 4,
      tickLabel(b),
      `font-size="11" text-anchor="end"`,
    );
  });
  doc.text(margin.left + gridW / 2, height - 14, "alpha (residual exponent)", `font-size="12" text-anchor="middle"`);
  doc.raw(
    `<text x="18" y="${margin.top + gridH / 2}" font-size="12" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${margin.top + gridH / 2})">beta (basis exponent)</text>`,
  );
  // color legend: low/high anchors
  const lx = margin.left + gridW + 24;
  const steps = 24;
  const legendH = Math.min(gridH, 140);
  for (let s = 0; s < steps; s++) {
    const t = s / (steps - 1);
    doc.rect(
      lx,
      margin.top + legendH - ((s + 1) * legendH) / steps,
      14,
      legendH / steps + 0.5,
      `fill="${lossColor(logMin + t * (logMax - logMin), logMin, logMax)}" stroke="none"`,
    );
  }
  doc.text(lx + 20, margin.top + legendH, tickLabel(Math.pow(10, logMin)), `font-size="10"`);
  doc.text(lx + 20, margin.top + 8, tickLabel(Math.pow(10, logMax)), `font-size="10"`);
  doc.text(lx, margin.top - 10, "median final loss", `font-size="11"`);
  const title = options.title ?? `power-law exponent sweep: ${cells.task}`;
  doc.text(width / 2, 20, title, `font-size="14" text-anchor="middle"`);
  return doc.render();
}
