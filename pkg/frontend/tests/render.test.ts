import { mkdtempSync, mkdirSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { parseTrajectory, SchemaError, TRAJECTORY_COLUMNS } from "../src/csv.js";
import { quatToEuler321Deg } from "../src/figures.js";
import { render } from "../src/render.js";

function syntheticCsv(rows = 50): string {
  const header = TRAJECTORY_COLUMNS.join(",");
  const lines = [header];
  for (let i = 0; i < rows; i++) {
    const t = i * 0.01;
    const values = TRAJECTORY_COLUMNS.map((name) => {
      if (name === "t") return t;
      if (name === "q4") return 1.0;
      if (name.startsWith("q")) return 0.0;
      if (name.startsWith("t") && name.length <= 2) return 50 + i * 0.1;
      return Math.sin(t + name.length);
    });
    lines.push(values.join(","));
  }
  return lines.join("\n") + "\n";
}

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "cdprsim-plots-"));
}

describe("csv parsing", () => {
  it("accepts the fixed header and reads all columns", () => {
    const traj = parseTrajectory(syntheticCsv());
    expect(traj.rows).toBe(50);
    expect(traj.columns.get("t")![1]).toBeCloseTo(0.01);
  });

  it("rejects a zero-row file", () => {
    const headerOnly = TRAJECTORY_COLUMNS.join(",") + "\n";
    expect(() => parseTrajectory(headerOnly)).toThrow(SchemaError);
  });

  it("names the missing column", () => {
    const broken = syntheticCsv()
      .split("\n")
      .map((line, i) => (i === 0 ? line.replace("err_angle_rad", "bogus") : line))
      .join("\n");
    expect(() => parseTrajectory(broken)).toThrow(/err_angle_rad/);
  });
});

describe("quaternion display conversion", () => {
  it("identity quaternion gives zero angles", () => {
    const [r, p, y] = quatToEuler321Deg(0, 0, 0, 1);
    expect(Math.abs(r) + Math.abs(p) + Math.abs(y)).toBeLessThan(1e-12);
  });

  it("pure yaw quaternion recovers the yaw angle", () => {
    const half = (30 * Math.PI) / 180 / 2;
    const [r, p, y] = quatToEuler321Deg(0, 0, Math.sin(half), Math.cos(half));
    expect(r).toBeCloseTo(0, 9);
    expect(p).toBeCloseTo(0, 9);
    expect(y).toBeCloseTo(30, 9);
  });
});

describe("render", () => {
  it("produces every single-run figure kind", () => {
    const dir = tempDir();
    const csv = join(dir, "trajectory.csv");
    writeFileSync(csv, syntheticCsv());
    for (const kind of ["pose-vs-time", "torques", "params", "pose-errors",
                        "error-angle"] as const) {
      const out = join(dir, `${kind}.svg`);
      render(kind, csv, out);
      const svg = readFileSync(out, "utf-8");
      expect(svg).toContain("<svg");
      expect(svg).toContain("polyline");
    }
  });

  it("overlays error-angle curves from a sweep directory", () => {
    const dir = tempDir();
    for (const name of ["so3_rigid", "euler321_rigid"]) {
      mkdirSync(join(dir, name));
      writeFileSync(join(dir, name, "trajectory.csv"), syntheticCsv());
    }
    const out = join(dir, "err.svg");
    render("error-angle", dir, out);
    const svg = readFileSync(out, "utf-8");
    expect(svg).toContain("so3_rigid");
    expect(svg).toContain("euler321_rigid");
  });

  it("builds the grouped RMS bars from a sweep summary", () => {
    const dir = tempDir();
    const table: Record<string, unknown> = {};
    for (const kind of ["euler321", "so3", "simplified-euler"]) {
      for (const mode of ["rigid", "elastic"]) {
        table[`${kind}/${mode}`] = {
          rms_error_angle_steady_rad: 0.002 + Math.random() * 0.001,
          rms_error_angle_transient_rad: 0.1,
          rms_position_error_steady_m: 1e-4,
          max_tension_n: 150,
          clamp_events: 3,
          failed: false,
        };
      }
    }
    writeFileSync(join(dir, "sweep_summary.json"), JSON.stringify(table));
    const out = join(dir, "rms.svg");
    render("rms-bars", dir, out);
    const svg = readFileSync(out, "utf-8");
    expect(svg).toContain("<rect");
    expect(svg).toContain("steady state");
  });

  it("raises a schema error for an empty sweep table", () => {
    const dir = tempDir();
    writeFileSync(join(dir, "sweep_summary.json"), "{}");
    expect(() => render("rms-bars", dir, join(dir, "x.svg"))).toThrow(SchemaError);
  });
});
