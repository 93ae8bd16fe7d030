/** Offline figure renderer for the benchmark CSVs.
 *
 * Usage:
 *   plot loss-curves --series name:run1.csv,run2.csv [--series ...] --out fig.svg
 *   plot heatmap --results results.csv [--task f1 --depth 1 --width 2 --grid-size 5] --out fig.svg
 *   plot ntk-spectra --spectra spectra.csv [--block fit] --out fig.svg
 */

import { writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { renderHeatmap } from "./figures/heatmap.js";
import { SeriesSpec, renderLossCurves } from "./figures/lossCurves.js";
import { renderSpectra } from "./figures/spectra.js";

function usage(): never {
  process.stderr.write(
    "usage: plot <loss-curves|heatmap|ntk-spectra> [options] --out file.svg\n",
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (!command) usage();
  try {
    let svg: string;
    let out: string | undefined;
    if (command === "loss-curves") {
      const { values } = parseArgs({
        args: rest,
        options: {
          series: { type: "string", multiple: true },
          out: { type: "string" },
          title: { type: "string" },
        },
      });
      const specs: SeriesSpec[] = (values.series ?? []).map((s) => {
        const colon = s.indexOf(":");
        if (colon < 0) throw new Error(`--series wants name:csv1,csv2 (got '${s}')`);
        return {
          name: s.slice(0, colon),
          paths: s.slice(colon + 1).split(",").filter((p) => p.length > 0),
        };
      });
      svg = renderLossCurves(specs, { title: values.title });
      out = values.out;
    } else if (command === "heatmap") {
      const { values } = parseArgs({
        args: rest,
        options: {
          results: { type: "string" },
          task: { type: "string" },
          depth: { type: "string" },
          width: { type: "string" },
          "grid-size": { type: "string" },
          out: { type: "string" },
          title: { type: "string" },
        },
      });
      if (!values.results) throw new Error("--results is required");
      svg = renderHeatmap(
        values.results,
        {
          task: values.task,
          depth: values.depth === undefined ? undefined : Number(values.depth),
          width: values.width === undefined ? undefined : Number(values.width),
          gridSize:
            values["grid-size"] === undefined ? undefined : Number(values["grid-size"]),
        },
        { title: values.title },
      );
      out = values.out;
    } else if (command === "ntk-spectra") {
      const { values } = parseArgs({
        args: rest,
        options: {
          spectra: { type: "string" },
          block: { type: "string", default: "fit" },
          out: { type: "string" },
          title: { type: "string" },
        },
      });
      if (!values.spectra) throw new Error("--spectra is required");
      svg = renderSpectra(values.spectra, values.block ?? "fit", { title: values.title });
      out = values.out;
    } else {
      usage();
    }
    if (!out) throw new Error("--out is required");
    writeFileSync(out, svg, "utf-8");
    process.stdout.write(`${out}\n`);
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${err instanceof Error ? err.message : err}\n`);
    return 1;
  }
}

const isDirectRun =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
