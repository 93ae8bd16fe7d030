/** Seed aggregation used by the figures. */

export function mean(values: number[]): number {
  if (values.length === 0) throw new Error("mean of empty list");
  return values.reduce((a, b) => a + b, 0) / values.length;
}

/** Standard error of the mean; zero for a single sample. */
export function standardError(values: number[]): number {
  if (values.length === 0) throw new Error("standard error of empty list");
  if (values.length === 1) return 0;
  const m = mean(values);
  const varSum = values.reduce((a, b) => a + (b - m) * (b - m), 0);
  return Math.sqrt(varSum / (values.length - 1)) / Math.sqrt(values.length);
}

/** Lower-median convention, matching the benchmark aggregation. */
export function lowerMedian(values: number[]): number {
  if (values.length === 0) throw new Error("median of empty list");
  const sorted = [...values].sort((a, b) => {
    const an = Number.isNaN(a) ? 1 : 0;
    const bn = Number.isNaN(b) ? 1 : 0;
    return an - bn || a - b;
  });
  return sorted[(sorted.length - 1) >> 1];
}
