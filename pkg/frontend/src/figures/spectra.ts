/** Kernel eigenvalue spectra: one curve per logged iteration, rank on x,
 * eigenvalue on log y.  Line style follows the figure convention:
 * solid at initialization, dashed at intermediate iterations, dotted at
 * the final iteration. */

import { column, numericColumn, readCsv } from "../csv.js";
import { linearScale, log10Scale, tickLabel } from "../scale.js";
import { PALETTE, SvgDoc, polylinePath } from "../svg.js";
import { drawAxes } from "./lossCurves.js";

export interface SpectraOptions {
  width?: number;
  height?: number;
  title?: string;
}

export function renderSpectra(
  spectraPath: string,
  block: string,
  options: SpectraOptions = {},
): string {
  const table = readCsv(spectraPath);
  const blocks = column(table, "block_id");
  const iters = numericColumn(table, "iteration");
  const ranks = numericColumn(table, "rank");
  const vals = numericColumn(table, "eigenvalue");

  const available = [...new Set(blocks)].sort();
  if (!available.includes(block)) {
    throw new Error(`block '${block}' not in CSV (have: ${available.join(", ")})`);
  }
  const byIter = new Map<number, { rank: number; value: number }[]>();
  for (let i = 0; i < blocks.length; i++) {
    if (blocks[i] !== block) continue;
    const bucket = byIter.get(iters[i]) ?? [];
    bucket.push({ rank: ranks[i], value: vals[i] });
    byIter.set(iters[i], bucket);
  }
  if (byIter.size === 0) throw new Error("empty selection for spectra");
  const iterations = [...byIter.keys()].sort((a, b) => a - b);

  const positive = vals.filter((v) => v > 0);
  if (positive.length === 0) throw new Error("no positive eigenvalues");
  const yMax = Math.max(...positive);
  const floor = yMax * 1e-16;
  const yMin = Math.max(Math.min(...positive.filter((v) => v > floor)), floor);
  const maxRank = Math.max(...ranks);

  const width = options.width ?? 560;
  const height = options.height ?? 400;
  const margin = { top: 36, right: 16, bottom: 44, left: 70 };
  const x = linearScale([1, maxRank], [margin.left, width - margin.right]);
  const y = log10Scale([yMin, yMax], [height - margin.bottom, margin.top]);

  const doc = new SvgDoc(width, height);
  drawAxes(doc, x, y, width, height, margin, "eigenvalue rank", "eigenvalue");
  iterations.forEach((it, i) => {
    const pts = byIter
      .get(it)!
      .sort((a, b) => a.rank - b.rank)
      .map((p) => ({ rank: p.rank, value: Math.max(p.value, floor) }));
    const dash =
      i === 0 ? "" : i === iterations.length - 1 ? `stroke-dasharray="2 3"` : `stroke-dasharray="6 4"`;
    const color = PALETTE[i % PALETTE.length];
    doc.path(
      polylinePath(pts.map((p) => x(p.rank)), pts.map((p) => y(p.value))),
      `fill="none" stroke="${color}" stroke-width="1.5" ${dash}`.trim(),
    );
    const ly = margin.top + 16 * i + 4;
    doc.raw(
      `<line x1="${width - margin.right - 130}" y1="${ly}" x2="${width - margin.right - 106}" ` +
        `y2="${ly}" stroke="${color}" stroke-width="1.5" ${dash}/>`.replace("  ", " "),
    );
    doc.text(width - margin.right - 100, ly + 4, `iter ${it}`, `font-size="11"`);
  });
  const title = options.title ?? `kernel spectrum (${block} block)`;
  doc.text(width / 2, 20, title, `font-size="14" text-anchor="middle"`);
  return doc.render();
}
