/** Deterministic SVG assembly: fixed number formatting, no timestamps,
 * so identical inputs always produce byte-identical files. */

export function fmt(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite coordinate: ${x}`);
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    );
    this.parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, style: string): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ${style}/>`,
    );
  }

  path(d: string, style: string): void {
    this.parts.push(`<path d="${d}" ${style}/>`);
  }

  rect(x: number, y: number, w: number, h: number, style: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ${style}/>`,
    );
  }

  text(x: number, y: number, content: string, style = ""): void {
    this.parts.push(`<text x="${fmt(x)}" y="${fmt(y)}" ${style}>${escapeXml(content)}</text>`);
  }

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function polylinePath(xs: number[], ys: number[]): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    parts.push(`${i === 0 ? "M" : "L"}${fmt(xs[i])} ${fmt(ys[i])}`);
  }
  return parts.join(" ");
}

/** Closed band between an upper and a (reversed) lower boundary. */
export function bandPath(xs: number[], upper: number[], lower: number[]): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    parts.push(`${i === 0 ? "M" : "L"}${fmt(xs[i])} ${fmt(upper[i])}`);
  }
  for (let i = xs.length - 1; i >= 0; i--) {
    parts.push(`L${fmt(xs[i])} ${fmt(lower[i])}`);
  }
  return parts.join(" ") + " Z";
}

/** Categorical palette (shared across figures for scheme identity). */
export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];

/** Two-stop log-scale colormap for heatmap cells (dark = low loss). */
export function lossColor(logValue: number, logMin: number, logMax: number): string {
  const t = logMax > logMin ? (logValue - logMin) / (logMax - logMin) : 0.5;
  // dark blue (low) -> pale yellow (high)
  const lo = [26, 35, 126];
  const hi = [255, 245, 157];
  const rgb = lo.map((l, i) => Math.round(l + (hi[i] - l) * Math.min(Math.max(t, 0), 1)));
  return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}
