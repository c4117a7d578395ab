import { EpisodeRow, SummaryRow } from "./csv";

export interface BandPoint {
  envStep: number;   // right edge of the bin
  mean: number;
  halfWidth: number; // one standard error across runs
}

export interface ErrorPoint {
  x: number;
  y: number;
  err: number;
}

function trailingMean(values: number[], window: number): number[] {
  if (window <= 1) return values.slice();
  const out: number[] = [];
  for (let i = 0; i < values.length; i++) {
    const lo = Math.max(0, i - window + 1);
    let sum = 0;
    for (let j = lo; j <= i; j++) sum += values[j];
    out.push(sum / (i - lo + 1));
  }
  return out;
}

function meanStderr(values: number[]): { mean: number; stderr: number } {
  const n = values.length;
  const mean = values.reduce((a, b) => a + b, 0) / n;
  if (n === 1) return { mean, stderr: 0 };
  const variance =
    values.reduce((a, b) => a + (b - mean) * (b - mean), 0) / (n - 1);
  return { mean, stderr: Math.sqrt(variance) / Math.sqrt(n) };
}

/**
 * Cross-run learning curve: per run, episode returns (optionally smoothed by
 * a trailing window) are bucketed into fixed env-step bins and averaged;
 * empty bins carry the previous bin's value forward. Only bins where every
 * run already has data are emitted, then runs are averaged with +-1
 * standard-error bands.
 */
export function learningCurve(
  runs: EpisodeRow[][],
  binCount = 100,
  smoothWindow = 1,
): BandPoint[] {
  if (runs.length === 0) return [];
  const totalSteps = Math.max(
    ...runs.map((r) => Math.max(...r.map((e) => e.envStepAtEpisodeEnd))),
  );
  const binSize = totalSteps / binCount;
  const perRun: (number | null)[][] = runs.map((episodes) => {
    const sorted = [...episodes].sort(
      (a, b) => a.envStepAtEpisodeEnd - b.envStepAtEpisodeEnd,
    );
    const smoothed = trailingMean(
      sorted.map((e) => e.undiscountedReturn),
      smoothWindow,
    );
    const bins: (number | null)[] = new Array(binCount).fill(null);
    const counts: number[] = new Array(binCount).fill(0);
    sorted.forEach((episode, i) => {
      let bin = Math.ceil(episode.envStepAtEpisodeEnd / binSize) - 1;
      bin = Math.min(Math.max(bin, 0), binCount - 1);
      // keep a running mean of the episodes landing in the bin
      if (bins[bin] === null) {
        bins[bin] = smoothed[i];
        counts[bin] = 1;
      } else {
        counts[bin] += 1;
        bins[bin] = (bins[bin] as number) + (smoothed[i] - (bins[bin] as number)) / counts[bin];
      }
    });
    // forward-fill gaps after the first filled bin
    for (let b = 1; b < binCount; b++) {
      if (bins[b] === null && bins[b - 1] !== null) bins[b] = bins[b - 1];
    }
    return bins;
  });

  const out: BandPoint[] = [];
  for (let b = 0; b < binCount; b++) {
    const column = perRun.map((bins) => bins[b]);
    if (column.some((v) => v === null)) continue;
    const { mean, stderr } = meanStderr(column as number[]);
    out.push({ envStep: (b + 1) * binSize, mean, halfWidth: stderr });
  }
  return out;
}

/** Mean average-return against the cycle time, one point per summary row. */
export function perfVsDt(summary: SummaryRow[]): ErrorPoint[] {
  return summary.map((row) => ({
    x: row.cycleTimeMs,
    y: row.meanAverageReturn,
    err: row.stderrAverageReturn,
  }));
}

/** Same values re-labelled against the batch time dt*b. */
export function perfVsBatchTime(summary: SummaryRow[]): ErrorPoint[] {
  return summary.map((row) => ({
    x: row.batchTimeMs,
    y: row.meanAverageReturn,
    err: row.stderrAverageReturn,
  }));
}
