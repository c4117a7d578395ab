#!/usr/bin/env node
/**
 * Render cyclerl harness CSVs as SVG figures.
 *
 * Usage:
 *   plot --kind learning_curve --in run0/episodes.csv --in run1/episodes.csv \
 *        --out curve.svg [--window 5] [--bins 100]
 *   plot --kind perf_vs_dt --in summary.csv --out perf.svg
 *   plot --kind perf_vs_batch_time --in summary.csv --out batch.svg
 */

import fs from "fs";
import path from "path";
import { readEpisodesCsv, readSummaryCsv, SchemaError } from "./csv";
import { learningCurve, perfVsBatchTime, perfVsDt } from "./series";
import { renderLearningCurve, renderPerfPoints } from "./svg";

interface Args {
  kind: string;
  inputs: string[];
  out: string;
  window: number;
  bins: number;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { kind: "", inputs: [], out: "", window: 1, bins: 100 };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = () => {
      if (i + 1 >= argv.length) throw new Error(`missing value for ${flag}`);
      return argv[++i];
    };
    if (flag === "--kind") args.kind = value();
    else if (flag === "--in") args.inputs.push(value());
    else if (flag === "--out") args.out = value();
    else if (flag === "--window") args.window = Number(value());
    else if (flag === "--bins") args.bins = Number(value());
    else throw new Error(`unknown flag ${flag}`);
  }
  if (!args.kind || args.inputs.length === 0 || !args.out)
    throw new Error("--kind, --in and --out are required");
  if (!Number.isInteger(args.window) || args.window < 1)
    throw new Error("--window must be an integer >= 1");
  return args;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    let svg: string;
    if (args.kind === "learning_curve") {
      const runs = args.inputs.map(readEpisodesCsv);
      svg = renderLearningCurve(learningCurve(runs, args.bins, args.window));
    } else if (args.kind === "perf_vs_dt") {
      svg = renderPerfPoints(perfVsDt(readSummaryCsv(args.inputs[0])),
                             "cycle time (ms)");
    } else if (args.kind === "perf_vs_batch_time") {
      svg = renderPerfPoints(perfVsBatchTime(readSummaryCsv(args.inputs[0])),
                             "batch time (ms)");
    } else {
      console.error(`error: unknown kind '${args.kind}'`);
      return 2;
    }
    fs.mkdirSync(path.dirname(path.resolve(args.out)), { recursive: true });
    fs.writeFileSync(args.out, svg, "utf-8");
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 3;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
