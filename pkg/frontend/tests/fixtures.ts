/** Shared fixture CSVs written to a temp dir. */

import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export function makeDir(): string {
  return mkdtempSync(join(tmpdir(), "kanlab-plots-"));
}

export function writeLossCsv(dir: string, name: string, losses: number[]): string {
  const lines = ["epoch,loss"];
  losses.forEach((v, i) => lines.push(`${i + 1},${v}`));
  const path = join(dir, name);
  writeFileSync(path, lines.join("\n") + "\n");
  return path;
}

export function writeResultsCsv(
  dir: string,
  name: string,
  rows: Array<{
    task?: string;
    depth?: number;
    width?: number;
    G?: number;
    scheme?: string;
    alpha?: number;
    beta?: number;
    seed?: number;
    final_loss?: number;
    rel_l2?: number;
  }>,
): string {
  const header =
    "task,depth,width,G,scheme,alpha,beta,seed,final_loss,rel_l2,diverged,wall_time_s";
  const lines = [header];
  for (const r of rows) {
    lines.push(
      [
        r.task ?? "f1",
        r.depth ?? 1,
        r.width ?? 2,
        r.G ?? 5,
        r.scheme ?? "power-law",
        r.alpha ?? 0,
        r.beta ?? 0,
        r.seed ?? 0,
        r.final_loss ?? 1,
        r.rel_l2 ?? 1,
        0,
        "1.0",
      ].join(","),
    );
  }
  const path = join(dir, name);
  writeFileSync(path, lines.join("\n") + "\n");
  return path;
}

export function writeSpectraCsv(
  dir: string,
  name: string,
  iterations: number[],
  ranks: number,
  block = "fit",
): string {
  const lines = ["iteration,block_id,rank,eigenvalue"];
  for (const it of iterations) {
    for (let r = 1; r <= ranks; r++) {
      const val = Math.pow(10, 2 - r / 2) * (1 + it / 100);
      lines.push(`${it},${block},${r},${val}`);
    }
  }
  const path = join(dir, name);
  writeFileSync(path, lines.join("\n") + "\n");
  return path;
}
