/**
 * The six figure kinds, assembled from trajectory CSVs and sweep summaries.
 * Euler-angle conversion from the logged quaternion happens here, for
 * display only; files stay in SI units and radians.
 */

import { Trajectory, column, SweepRow } from "./csv.js";
import { linePanels, groupedBars, color, Panel, Series } from "./svg.js";

export const FIGURE_KINDS = [
  "pose-vs-time",
  "torques",
  "params",
  "error-angle",
  "rms-bars",
  "pose-errors",
] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

const DEG = 180 / Math.PI;

/** 3-2-1 Euler angles (deg) of the logged vector-first quaternion. */
export function quatToEuler321Deg(
  e1: number,
  e2: number,
  e3: number,
  eta: number,
): [number, number, number] {
  const ee = e1 * e1 + e2 * e2 + e3 * e3;
  const s = eta * eta - ee;
  // C = (eta^2 - e.e) I + 2 e e^T - 2 eta cross(e)
  const c00 = s + 2 * e1 * e1;
  const c01 = 2 * e1 * e2 + 2 * eta * e3;
  const c02 = 2 * e1 * e3 - 2 * eta * e2;
  const c12 = 2 * e2 * e3 + 2 * eta * e1;
  const c22 = s + 2 * e3 * e3;
  return [
    Math.atan2(c12, c22) * DEG,
    Math.asin(Math.max(-1, Math.min(1, -c02))) * DEG,
    Math.atan2(c01, c00) * DEG,
  ];
}

function eulerSeries(traj: Trajectory): [Float64Array, Float64Array, Float64Array] {
  const q1 = column(traj, "q1");
  const q2 = column(traj, "q2");
  const q3 = column(traj, "q3");
  const q4 = column(traj, "q4");
  const roll = new Float64Array(traj.rows);
  const pitch = new Float64Array(traj.rows);
  const yaw = new Float64Array(traj.rows);
  for (let i = 0; i < traj.rows; i++) {
    [roll[i], pitch[i], yaw[i]] = quatToEuler321Deg(q1[i], q2[i], q3[i], q4[i]);
  }
  return [roll, pitch, yaw];
}

export function poseVsTime(traj: Trajectory): string {
  const t = column(traj, "t");
  const euler = eulerSeries(traj);
  const axisNames = ["x", "y", "z"] as const;
  const panels: Panel[] = axisNames.map((ax, i) => ({
    yLabel: `r${ax} (m)`,
    series: [
      { x: t, y: column(traj, `r${ax}`), color: color(0), label: "actual" },
      {
        x: t,
        y: column(traj, `rd${ax}`),
        color: color(1),
        label: "desired",
        dash: "6,4",
      },
    ] as Series[],
  }));
  ["roll (deg)", "pitch (deg)", "yaw (deg)"].forEach((label, i) => {
    panels.push({
      yLabel: label,
      series: [{ x: t, y: euler[i], color: color(0), label: "actual" }],
    });
  });
  return linePanels({
    title: "Payload pose versus time",
    xLabel: "time (s)",
    panels,
    panelHeight: 130,
  });
}

export function torques(traj: Trajectory): string {
  const t = column(traj, "t");
  const series: Series[] = [];
  for (let i = 1; i <= 8; i++) {
    series.push({
      x: t,
      y: column(traj, `tau${i}`),
      color: color(i - 1),
      label: `winch ${i}`,
    });
  }
  return linePanels({
    title: "Winch torques versus time",
    xLabel: "time (s)",
    panels: [{ yLabel: "torque (N m)", series }],
    panelHeight: 360,
  });
}

export function params(traj: Trajectory): string {
  const t = column(traj, "t");
  const inertiaLabels = ["I11", "I22", "I33", "I12", "I13", "I23"];
  const inertiaSeries: Series[] = inertiaLabels.map((label, i) => ({
    x: t,
    y: column(traj, `ahat${i + 2}`),
    color: color(i),
    label,
  }));
  return linePanels({
    title: "Estimated parameters versus time",
    xLabel: "time (s)",
    panels: [
      {
        yLabel: "mass estimate (kg)",
        series: [{ x: t, y: column(traj, "ahat1"), color: color(0), label: "m" }],
      },
      { yLabel: "inertia estimates (kg m^2)", series: inertiaSeries },
    ],
    panelHeight: 200,
  });
}

export function errorAngle(trajs: Map<string, Trajectory>): string {
  const series: Series[] = [];
  let i = 0;
  for (const [label, traj] of trajs) {
    const err = column(traj, "err_angle_rad");
    const deg = new Float64Array(err.length);
    for (let k = 0; k < err.length; k++) deg[k] = err[k] * DEG;
    series.push({ x: column(traj, "t"), y: deg, color: color(i++), label });
  }
  return linePanels({
    title: "Attitude tracking error versus time",
    xLabel: "time (s)",
    panels: [{ yLabel: "error angle (deg)", series }],
    panelHeight: 360,
  });
}

export function rmsBars(table: Map<string, SweepRow>): string {
  const categories = [...table.keys()].sort();
  const values = categories.map((key) => {
    const row = table.get(key)!;
    return [
      (row.rms_error_angle_transient_rad ?? NaN) * DEG,
      (row.rms_error_angle_steady_rad ?? NaN) * DEG,
    ];
  });
  return groupedBars({
    title: "RMS attitude tracking error by controller",
    yLabel: "RMS error angle (deg)",
    categories,
    members: ["transient (first 2 s)", "steady state (after 2 s)"],
    values,
  });
}

export function poseErrors(traj: Trajectory): string {
  const t = column(traj, "t");
  const panels: Panel[] = (["x", "y", "z"] as const).map((ax) => ({
    yLabel: `rtil_${ax} (m)`,
    series: [{ x: t, y: column(traj, `rtil_${ax}`), color: color(0) }],
  }));
  const err = column(traj, "err_angle_rad");
  const deg = new Float64Array(err.length);
  for (let k = 0; k < err.length; k++) deg[k] = err[k] * DEG;
  panels.push({
    yLabel: "error angle (deg)",
    series: [{ x: t, y: deg, color: color(1) }],
  });
  return linePanels({
    title: "Pose tracking errors versus time",
    xLabel: "time (s)",
    panels,
    panelHeight: 130,
  });
}
