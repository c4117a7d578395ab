import fs from "fs";

export interface EpisodeRow {
  runId: number;
  cycleTimeMs: number;
  envStepAtEpisodeEnd: number;
  episodeIndex: number;
  undiscountedReturn: number;
}

export interface SummaryRow {
  cycleTimeMs: number;
  batchSize: number;
  batchTimeMs: number;
  numRuns: number;
  runsWithEpisodes: number;
  meanAverageReturn: number;
  stderrAverageReturn: number;
}

export class SchemaError extends Error {
  constructor(public column: string, file: string) {
    super(`missing or malformed column '${column}' in ${file}`);
  }
}

function parseTable(path: string): Record<string, string>[] {
  const text = fs.readFileSync(path, "utf-8");
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length === 0) return [];
  const header = lines[0].split(",");
  return lines.slice(1).map((line) => {
    const cells = line.split(",");
    const row: Record<string, string> = {};
    header.forEach((name, i) => (row[name] = cells[i]));
    return row;
  });
}

function num(row: Record<string, string>, column: string, file: string): number {
  const raw = row[column];
  if (raw === undefined) throw new SchemaError(column, file);
  const value = Number(raw);
  if (Number.isNaN(value) && raw.toLowerCase() !== "nan")
    throw new SchemaError(column, file);
  return value;
}

export function readEpisodesCsv(path: string): EpisodeRow[] {
  return parseTable(path).map((row) => ({
    runId: num(row, "run_id", path),
    cycleTimeMs: num(row, "cycle_time_ms", path),
    envStepAtEpisodeEnd: num(row, "env_step_at_episode_end", path),
    episodeIndex: num(row, "episode_index", path),
    undiscountedReturn: num(row, "undiscounted_return", path),
  }));
}

export function readSummaryCsv(path: string): SummaryRow[] {
  return parseTable(path).map((row) => ({
    cycleTimeMs: num(row, "cycle_time_ms", path),
    batchSize: num(row, "batch_size", path),
    batchTimeMs: num(row, "batch_time_ms", path),
    numRuns: num(row, "num_runs", path),
    runsWithEpisodes: num(row, "runs_with_episodes", path),
    meanAverageReturn: num(row, "mean_average_return", path),
    stderrAverageReturn: num(row, "stderr_average_return", path),
  }));
}
