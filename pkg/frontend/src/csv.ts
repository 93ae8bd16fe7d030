/** Minimal CSV handling for the benchmark CSVs (unquoted numeric cells). */

import { readFileSync } from "node:fs";

export interface Table {
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  for (const row of rows) {
    if (row.length !== columns.length) {
      throw new Error(
        `ragged CSV row: expected ${columns.length} cells, got ${row.length}`,
      );
    }
  }
  return { columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"));
}

/** Column accessor that fails fast on missing columns. */
export function column(table: Table, name: string): string[] {
  const i = table.columns.indexOf(name);
  if (i < 0) {
    throw new Error(`missing column '${name}' (have: ${table.columns.join(", ")})`);
  }
  return table.rows.map((r) => r[i]);
}

/** Python float spellings (inf, -inf, nan) appear in the benchmark CSVs. */
const PYTHON_FLOATS: Record<string, number> = {
  inf: Infinity,
  "-inf": -Infinity,
  Infinity: Infinity,
  "-Infinity": -Infinity,
  nan: NaN,
  NaN: NaN,
};

export function numericColumn(table: Table, name: string): number[] {
  return column(table, name).map((v) => {
    if (v in PYTHON_FLOATS) return PYTHON_FLOATS[v];
    const x = Number(v);
    if (Number.isNaN(x)) {
      throw new Error(`non-numeric cell '${v}' in column '${name}'`);
    }
    return x;
  });
}
