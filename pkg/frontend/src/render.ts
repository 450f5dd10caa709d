#!/usr/bin/env node
/**
 * Figure renderer for the CDPR simulator outputs.
 *
 * Usage:
 *   cdprsim-plots render --kind KIND --in PATH --out OUT.svg
 *
 * Kinds: pose-vs-time | torques | params | error-angle | rms-bars |
 * pose-errors.  `--in` is a trajectory.csv for the single-run kinds; for
 * error-angle it may be a comma-separated list of CSVs or a sweep output
 * directory, and for rms-bars a sweep_summary.json or the directory that
 * contains one.
 */

import { existsSync, readdirSync, statSync, writeFileSync } from "fs";
import { basename, dirname, join } from "path";

import { loadSweepSummary, loadTrajectory, SchemaError, Trajectory } from "./csv.js";
import {
  errorAngle,
  FIGURE_KINDS,
  FigureKind,
  params,
  poseErrors,
  poseVsTime,
  rmsBars,
  torques,
} from "./figures.js";

function usage(message?: string): never {
  if (message) console.error(`error: ${message}`);
  console.error(
    "usage: cdprsim-plots render --kind " +
      FIGURE_KINDS.join("|") +
      " --in PATH --out OUT.svg",
  );
  process.exit(2);
}

function parseArgs(argv: string[]): { kind: FigureKind; input: string; out: string } {
  if (argv[0] !== "render") usage(`unknown command '${argv[0] ?? ""}'`);
  let kind = "";
  let input = "";
  let out = "";
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) usage(`missing value for ${flag}`);
    if (flag === "--kind") kind = value;
    else if (flag === "--in") input = value;
    else if (flag === "--out") out = value;
    else usage(`unknown flag ${flag}`);
  }
  if (!kind || !input || !out) usage("--kind, --in and --out are required");
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    usage(`unknown figure kind '${kind}' (choose from ${FIGURE_KINDS.join(", ")})`);
  }
  return { kind: kind as FigureKind, input, out };
}

function collectTrajectories(input: string): Map<string, Trajectory> {
  const out = new Map<string, Trajectory>();
  const paths = input.includes(",")
    ? input.split(",")
    : statSync(input).isDirectory()
      ? readdirSync(input)
          .map((d) => join(input, d, "trajectory.csv"))
          .filter((p) => existsSync(p))
      : [input];
  if (paths.length === 0) {
    throw new SchemaError(`${input}: no trajectory.csv files found`);
  }
  for (const p of paths) {
    const label = statSync(input).isDirectory() || input.includes(",")
      ? basename(dirname(p))
      : basename(p);
    out.set(label, loadTrajectory(p));
  }
  return out;
}

export function render(kind: FigureKind, input: string, out: string): void {
  let svg: string;
  switch (kind) {
    case "pose-vs-time":
      svg = poseVsTime(loadTrajectory(input));
      break;
    case "torques":
      svg = torques(loadTrajectory(input));
      break;
    case "params":
      svg = params(loadTrajectory(input));
      break;
    case "pose-errors":
      svg = poseErrors(loadTrajectory(input));
      break;
    case "error-angle":
      svg = errorAngle(collectTrajectories(input));
      break;
    case "rms-bars": {
      const path = statSync(input).isDirectory()
        ? join(input, "sweep_summary.json")
        : input;
      svg = rmsBars(loadSweepSummary(path));
      break;
    }
  }
  writeFileSync(out, svg);
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(basename(process.argv[1]));

if (invokedDirectly) {
  const { kind, input, out } = parseArgs(process.argv.slice(2));
  try {
    render(kind, input, out);
    console.log(`wrote ${out}`);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      process.exit(1);
    }
    console.error(String(err));
    process.exit(1);
  }
}
