/**
 * Trajectory CSV loader.
 *
 * The simulator writes a fixed 47-column header; anything else is a schema
 * error that names the first offending column so broken pipelines fail
 * loudly instead of plotting garbage.
 */

import { readFileSync } from "fs";

export const TRAJECTORY_COLUMNS: string[] = [
  "t", "rx", "ry", "rz", "rdx", "rdy", "rdz", "q1", "q2", "q3", "q4",
  "err_angle_rad", "rtil_x", "rtil_y", "rtil_z",
  ...Array.from({ length: 8 }, (_, i) => `t${i + 1}`),
  ...Array.from({ length: 8 }, (_, i) => `tau${i + 1}`),
  ...Array.from({ length: 7 }, (_, i) => `ahat${i + 1}`),
  ...Array.from({ length: 6 }, (_, i) => `s${i + 1}`),
  "passivity_integral", "V1", "V2",
];

export class SchemaError extends Error {}

export interface Trajectory {
  /** column name -> series */
  columns: Map<string, Float64Array>;
  rows: number;
}

export function parseTrajectory(text: string, source = "<csv>"): Trajectory {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${source}: empty file`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  for (const expected of TRAJECTORY_COLUMNS) {
    if (!header.includes(expected)) {
      throw new SchemaError(`${source}: missing column '${expected}'`);
    }
  }
  const rows = lines.length - 1;
  if (rows === 0) {
    throw new SchemaError(`${source}: no data rows`);
  }
  const data = header.map(() => new Float64Array(rows));
  for (let i = 0; i < rows; i++) {
    const parts = lines[i + 1].split(",");
    if (parts.length !== header.length) {
      throw new SchemaError(
        `${source}: row ${i + 1} has ${parts.length} fields, expected ${header.length}`,
      );
    }
    for (let j = 0; j < header.length; j++) {
      data[j][i] = Number(parts[j]);
    }
  }
  const columns = new Map<string, Float64Array>();
  header.forEach((name, j) => columns.set(name, data[j]));
  return { columns, rows };
}

export function loadTrajectory(path: string): Trajectory {
  return parseTrajectory(readFileSync(path, "utf-8"), path);
}

export function column(traj: Trajectory, name: string): Float64Array {
  const col = traj.columns.get(name);
  if (!col) throw new SchemaError(`missing column '${name}'`);
  return col;
}

/** Comparison table written by the sweep (controller/mode -> metrics). */
export interface SweepRow {
  rms_error_angle_steady_rad: number | null;
  rms_error_angle_transient_rad: number | null;
  failed: boolean;
}

export function loadSweepSummary(path: string): Map<string, SweepRow> {
  const raw = JSON.parse(readFileSync(path, "utf-8")) as Record<string, SweepRow>;
  const table = new Map<string, SweepRow>();
  for (const [key, row] of Object.entries(raw)) {
    if (
      typeof row !== "object" ||
      row === null ||
      !("rms_error_angle_steady_rad" in row)
    ) {
      throw new SchemaError(`${path}: entry '${key}' is not a sweep row`);
    }
    table.set(key, row);
  }
  if (table.size === 0) throw new SchemaError(`${path}: empty sweep table`);
  return table;
}
