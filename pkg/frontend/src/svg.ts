/**
 * Minimal hand-built SVG charts: stacked line panels and grouped bars.
 * No DOM, no browser; just strings.
 */

export interface Series {
  x: ArrayLike<number>;
  y: ArrayLike<number>;
  color: string;
  label?: string;
  dash?: string; // stroke-dasharray, e.g. "5,3" for desired trajectories
  width?: number;
}

export interface Panel {
  title?: string;
  yLabel: string;
  series: Series[];
}

const PALETTE = [
  "#4361ee", "#e63946", "#2d6a4f", "#f3722c", "#7209b7", "#118ab2",
  "#9c6644", "#495057",
];

export function color(i: number): string {
  return PALETTE[i % PALETTE.length];
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) {
    hi = lo + 1;
  }
  const span = hi - lo;
  const step0 = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((c) => span / c <= n) ?? candidates[4];
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.001) return v.toExponential(1);
  return String(Number(v.toPrecision(4)));
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Stacked time-series panels sharing the x axis. */
export function linePanels(opts: {
  title: string;
  xLabel: string;
  panels: Panel[];
  width?: number;
  panelHeight?: number;
}): string {
  const width = opts.width ?? 860;
  const panelHeight = opts.panelHeight ?? 170;
  const margin = { left: 72, right: 16, top: 44, bottom: 40 };
  const innerW = width - margin.left - margin.right;
  const height = margin.top + opts.panels.length * panelHeight + margin.bottom;

  let xMin = Infinity;
  let xMax = -Infinity;
  for (const p of opts.panels) {
    for (const s of p.series) {
      for (let i = 0; i < s.x.length; i++) {
        const v = s.x[i];
        if (v < xMin) xMin = v;
        if (v > xMax) xMax = v;
      }
    }
  }
  if (!isFinite(xMin)) {
    xMin = 0;
    xMax = 1;
  }
  const xTo = (v: number) =>
    margin.left + ((v - xMin) / (xMax - xMin || 1)) * innerW;

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica,Arial,sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<text x="${width / 2}" y="24" text-anchor="middle" font-size="16" font-weight="bold">${esc(opts.title)}</text>`,
  );

  opts.panels.forEach((panel, pi) => {
    const top = margin.top + pi * panelHeight + 8;
    const innerH = panelHeight - 34;
    let yMin = Infinity;
    let yMax = -Infinity;
    for (const s of panel.series) {
      for (let i = 0; i < s.y.length; i++) {
        const v = s.y[i];
        if (isFinite(v)) {
          if (v < yMin) yMin = v;
          if (v > yMax) yMax = v;
        }
      }
    }
    if (!isFinite(yMin)) {
      yMin = 0;
      yMax = 1;
    }
    if (yMax === yMin) {
      yMax += 1;
      yMin -= 1;
    }
    const pad = 0.06 * (yMax - yMin);
    yMin -= pad;
    yMax += pad;
    const yTo = (v: number) => top + innerH - ((v - yMin) / (yMax - yMin)) * innerH;

    out.push(
      `<rect x="${margin.left}" y="${top}" width="${innerW}" height="${innerH}" fill="none" stroke="#ccc"/>`,
    );
    for (const tick of niceTicks(yMin, yMax)) {
      const y = yTo(tick);
      out.push(
        `<line x1="${margin.left}" y1="${y}" x2="${margin.left + innerW}" y2="${y}" stroke="#eee"/>`,
        `<text x="${margin.left - 6}" y="${y + 4}" text-anchor="end" font-size="11">${fmt(tick)}</text>`,
      );
    }
    for (const tick of niceTicks(xMin, xMax, 8)) {
      const x = xTo(tick);
      out.push(
        `<line x1="${x}" y1="${top}" x2="${x}" y2="${top + innerH}" stroke="#f4f4f4"/>`,
      );
      if (pi === opts.panels.length - 1) {
        out.push(
          `<text x="${x}" y="${top + innerH + 16}" text-anchor="middle" font-size="11">${fmt(tick)}</text>`,
        );
      }
    }
    out.push(
      `<text x="16" y="${top + innerH / 2}" font-size="12" ` +
        `transform="rotate(-90 16 ${top + innerH / 2})" text-anchor="middle">${esc(panel.yLabel)}</text>`,
    );
    if (panel.title) {
      out.push(
        `<text x="${margin.left + 6}" y="${top - 4}" font-size="12" fill="#333">${esc(panel.title)}</text>`,
      );
    }

    for (const s of panel.series) {
      const pts: string[] = [];
      // decimate to at most ~2000 points per path to keep files small
      const stride = Math.max(1, Math.floor(s.x.length / 2000));
      for (let i = 0; i < s.x.length; i += stride) {
        pts.push(`${xTo(s.x[i]).toFixed(2)},${yTo(s.y[i]).toFixed(2)}`);
      }
      const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
      out.push(
        `<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color}" ` +
          `stroke-width="${s.width ?? 1.3}"${dash}/>`,
      );
    }

    // per-panel legend, wrapped into rows so long controller lists fit
    let lx = margin.left + 10;
    let ly = top + 12;
    for (const s of panel.series) {
      if (!s.label) continue;
      const entryWidth = 30 + 7 * s.label.length;
      if (lx + entryWidth > margin.left + innerW - 10) {
        lx = margin.left + 10;
        ly += 14;
      }
      const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
      out.push(
        `<line x1="${lx}" y1="${ly}" x2="${lx + 20}" y2="${ly}" stroke="${s.color}" stroke-width="2"${dash}/>`,
        `<text x="${lx + 24}" y="${ly + 4}" font-size="11">${esc(s.label)}</text>`,
      );
      lx += entryWidth;
    }
  });

  out.push(
    `<text x="${margin.left + innerW / 2}" y="${height - 10}" text-anchor="middle" font-size="12">${esc(opts.xLabel)}</text>`,
    "</svg>",
  );
  return out.join("\n");
}

/** Grouped bar chart (one group per category, one bar per member). */
export function groupedBars(opts: {
  title: string;
  yLabel: string;
  categories: string[];
  members: string[];
  values: number[][]; // [category][member]
  width?: number;
  height?: number;
}): string {
  const width = opts.width ?? 860;
  const height = opts.height ?? 420;
  const margin = { left: 72, right: 16, top: 48, bottom: 96 };
  const innerW = width - margin.left - margin.right;
  const innerH = height - margin.top - margin.bottom;
  const flat = opts.values.flat().filter((v) => isFinite(v));
  const yMax = Math.max(...flat, 1e-12) * 1.1;
  const yTo = (v: number) => margin.top + innerH - (v / yMax) * innerH;

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica,Arial,sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<text x="${width / 2}" y="26" text-anchor="middle" font-size="16" font-weight="bold">${esc(opts.title)}</text>`,
    `<text x="16" y="${margin.top + innerH / 2}" font-size="12" ` +
      `transform="rotate(-90 16 ${margin.top + innerH / 2})" text-anchor="middle">${esc(opts.yLabel)}</text>`,
  );
  for (const tick of niceTicks(0, yMax)) {
    const y = yTo(tick);
    out.push(
      `<line x1="${margin.left}" y1="${y}" x2="${margin.left + innerW}" y2="${y}" stroke="#eee"/>`,
      `<text x="${margin.left - 6}" y="${y + 4}" text-anchor="end" font-size="11">${fmt(tick)}</text>`,
    );
  }
  const groupW = innerW / opts.categories.length;
  const barW = (groupW * 0.7) / opts.members.length;
  opts.categories.forEach((cat, ci) => {
    const x0 = margin.left + ci * groupW + groupW * 0.15;
    opts.members.forEach((_, mi) => {
      const v = opts.values[ci][mi];
      if (!isFinite(v)) return;
      out.push(
        `<rect x="${x0 + mi * barW}" y="${yTo(v)}" width="${barW * 0.92}" ` +
          `height="${margin.top + innerH - yTo(v)}" fill="${color(mi)}"/>`,
      );
    });
    const cx = margin.left + ci * groupW + groupW / 2;
    out.push(
      `<text x="${cx}" y="${margin.top + innerH + 14}" font-size="11" ` +
        `transform="rotate(30 ${cx} ${margin.top + innerH + 14})">${esc(cat)}</text>`,
    );
  });
  opts.members.forEach((m, mi) => {
    const lx = margin.left + 8 + mi * 150;
    out.push(
      `<rect x="${lx}" y="${height - 22}" width="14" height="12" fill="${color(mi)}"/>`,
      `<text x="${lx + 18}" y="${height - 12}" font-size="11">${esc(m)}</text>`,
    );
  });
  out.push(`<line x1="${margin.left}" y1="${yTo(0)}" x2="${margin.left + innerW}" y2="${yTo(0)}" stroke="#333"/>`, "</svg>");
  return out.join("\n");
}
