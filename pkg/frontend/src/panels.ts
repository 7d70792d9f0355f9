/** The five SVG panel renderers. */

import { interpolateRdBu } from "d3-scale-chromatic";
import {
  readAdiabaticityCsv,
  readProfileCsv,
  readPulseCsv,
  type ProfileRow,
} from "./csv.js";
import { engReductionPercent, fmt, minAdiabaticity } from "./legend.js";
import {
  drawAxes,
  extent,
  MARGIN,
  num,
  PANEL_HEIGHT,
  PANEL_WIDTH,
  Svg,
  type Axes,
} from "./svg.js";
import type {
  AdiabaticityPanel,
  MapPanel,
  ProfilePanel,
  PulsePanel,
  TrajectoryPanel,
} from "./recipe.js";

const LINE = 'stroke="#1f77b4" stroke-width="1.5"';
const LINE2 = 'stroke="#d62728" stroke-width="1.5"';
const DASHED = 'stroke="#333333" stroke-width="1" stroke-dasharray="5 3"';

function plotBox() {
  return {
    x0: MARGIN.left,
    y0: MARGIN.top,
    x1: PANEL_WIDTH - MARGIN.right,
    y1: PANEL_HEIGHT - MARGIN.bottom,
  };
}

function polyline(axes: Axes, xs: number[], ys: number[]): [number, number][] {
  return xs.map((x, i) => [axes.x(x), axes.y(ys[i])] as [number, number]);
}

/** Amplitude (top) and phase (bottom) waveforms vs time in ms. */
export function renderPulsePanel(panel: PulsePanel): string {
  const pulse = readPulseCsv(panel.pulse_csv);
  const n = pulse.amplitudeGauss.length;
  const tMs = pulse.amplitudeGauss.map((_, i) => (i + 0.5) * pulse.dtSeconds * 1e3);
  const svg = new Svg(PANEL_WIDTH, PANEL_HEIGHT * 2);
  const top = { x0: MARGIN.left, y0: MARGIN.top, x1: PANEL_WIDTH - MARGIN.right, y1: PANEL_HEIGHT - MARGIN.bottom };
  const bottom = {
    x0: MARGIN.left,
    y0: PANEL_HEIGHT + MARGIN.top,
    x1: PANEL_WIDTH - MARGIN.right,
    y1: 2 * PANEL_HEIGHT - MARGIN.bottom,
  };
  const tDomain: [number, number] = [0, n * pulse.dtSeconds * 1e3];
  const ampAxes = drawAxes(svg, top, tDomain, [0, extent(pulse.amplitudeGauss)[1] * 1.05 || 1], {
    x: "time (ms)",
    y: "amplitude (G)",
    title: panel.title ?? "pulse",
  });
  svg.path(polyline(ampAxes, tMs, pulse.amplitudeGauss), LINE);
  const phaseAxes = drawAxes(svg, bottom, tDomain, extent(pulse.phaseRad), {
    x: "time (ms)",
    y: "phase (rad)",
  });
  svg.path(polyline(phaseAxes, tMs, pulse.phaseRad), LINE);
  return svg.toString();
}

function componentValues(rows: ProfileRow[], component: "mz" | "transverse"): number[] {
  return rows.map((r) =>
    component === "mz" ? r.mz : Math.hypot(r.mx, r.my),
  );
}

/** Rows at the b1 scale closest to the requested one. */
function sliceAtB1(rows: ProfileRow[], b1: number): ProfileRow[] {
  const scales = [...new Set(rows.map((r) => r.b1Scale))];
  let best = scales[0];
  for (const s of scales) {
    if (Math.abs(s - b1) < Math.abs(best - b1)) best = s;
  }
  return rows.filter((r) => r.b1Scale === best);
}

/** 1-D profile vs offset, optional overlay, zoom inset, and ENG legend. */
export function renderProfilePanel(panel: ProfilePanel): string {
  const component = panel.component ?? "mz";
  const rows = sliceAtB1(readProfileCsv(panel.profile_csv), panel.b1_scale ?? 1.0);
  const offsets = rows.map((r) => r.offsetHz);
  const values = componentValues(rows, component);
  const overlay = panel.overlay_csv
    ? sliceAtB1(readProfileCsv(panel.overlay_csv), panel.b1_scale ?? 1.0)
    : null;

  const svg = new Svg(PANEL_WIDTH, PANEL_HEIGHT);
  const yDomain: [number, number] =
    component === "mz" ? [-1.05, 1.05] : [-0.05, 1.05];
  const axes = drawAxes(svg, plotBox(), extent(offsets), yDomain, {
    x: "offset (Hz)",
    y: component === "mz" ? "Mz" : "|Mxy|",
    title: panel.title ?? "profile",
  });
  svg.path(polyline(axes, offsets, values), LINE);
  if (overlay) {
    svg.path(
      polyline(axes, overlay.map((r) => r.offsetHz), componentValues(overlay, component)),
      LINE2,
    );
  }
  if (panel.legend_pulses) {
    const reduction = engReductionPercent(
      panel.legend_pulses.reference,
      panel.legend_pulses.candidate,
    );
    svg.text(plotBox().x0 + 8, plotBox().y0 + 14, `ENG reduction: ${fmt(reduction)}%`, {
      size: 10,
    });
  }
  if (panel.zoom) {
    const [lo, hi] = panel.zoom;
    const box = plotBox();
    const inset = {
      x0: box.x1 - 150,
      y0: box.y0 + 10,
      x1: box.x1 - 10,
      y1: box.y0 + 100,
    };
    svg.rect(inset.x0, inset.y0, inset.x1 - inset.x0, inset.y1 - inset.y0, 'fill="white" stroke="black" stroke-width="1"');
    const mask = rows.filter((r) => r.offsetHz >= lo && r.offsetHz <= hi);
    const zoomVals = componentValues(mask, component);
    const zoomAxes = drawAxes(svg, inset, [lo, hi], extent(zoomVals), {}, 3);
    svg.path(polyline(zoomAxes, mask.map((r) => r.offsetHz), zoomVals), LINE);
  }
  return svg.toString();
}

/** 2-D B1-scale x offset map, diverging color over Mz in [-1, 1]. */
export function renderMapPanel(panel: MapPanel): string {
  const rows = readProfileCsv(panel.profile_csv);
  const b1s = [...new Set(rows.map((r) => r.b1Scale))].sort((a, b) => a - b);
  const offs = [...new Set(rows.map((r) => r.offsetHz))].sort((a, b) => a - b);
  const svg = new Svg(PANEL_WIDTH, PANEL_HEIGHT);
  const box = plotBox();
  const axes = drawAxes(
    svg,
    box,
    [offs[0], offs[offs.length - 1]],
    [b1s[0], b1s[b1s.length - 1]],
    { x: "offset (Hz)", y: "B1 scale", title: panel.title ?? "inversion map" },
  );
  const cellW = (box.x1 - box.x0) / offs.length;
  const cellH = (box.y1 - box.y0) / b1s.length;
  for (const row of rows) {
    const ix = offs.indexOf(row.offsetHz);
    const iy = b1s.indexOf(row.b1Scale);
    // Map mz = +1 to blue, mz = -1 to red.
    const color = interpolateRdBu((row.mz + 1) / 2);
    svg.rect(
      box.x0 + ix * cellW,
      box.y1 - (iy + 1) * cellH,
      cellW + 0.5,
      cellH + 0.5,
      `fill="${color}" stroke="none"`,
    );
  }
  svg.rect(box.x0, box.y0, box.x1 - box.x0, box.y1 - box.y0, 'fill="none" stroke="black" stroke-width="1"');
  void axes;
  return svg.toString();
}

/** Fixed oblique projection of (mx, my, mz) onto the page. */
function project(mx: number, my: number, mz: number): [number, number] {
  // Orthographic view rotated 30 degrees about z then 20 degrees about x.
  const az = Math.PI / 6;
  const el = Math.PI / 9;
  const x1 = mx * Math.cos(az) - my * Math.sin(az);
  const y1 = mx * Math.sin(az) + my * Math.cos(az);
  const y2 = y1 * Math.cos(el) - mz * Math.sin(el);
  return [x1, -y2];
}

/** Magnetization path across time-ordered profile snapshots on the sphere. */
export function renderTrajectoryPanel(panel: TrajectoryPanel): string {
  const points: [number, number, number][] = [[0, 0, 1]];
  for (const file of panel.profile_csvs) {
    const row = readProfileCsv(file).find(
      (r) => r.b1Scale === panel.b1_scale && r.offsetHz === panel.offset_hz,
    );
    if (!row) {
      throw new Error(
        `grid point (${panel.b1_scale}, ${panel.offset_hz}) absent from ${file}`,
      );
    }
    points.push([row.mx, row.my, row.mz]);
  }
  const svg = new Svg(PANEL_WIDTH, PANEL_HEIGHT);
  const cx = PANEL_WIDTH / 2;
  const cy = PANEL_HEIGHT / 2 + 10;
  const radius = 120;
  const toPage = (m: [number, number, number]): [number, number] => {
    const [px, py] = project(m[0], m[1], m[2]);
    return [cx + radius * px, cy + radius * py];
  };
  svg.text(cx, 18, panel.title ?? "spin trajectory", { size: 12, anchor: "middle" });
  // Unit-sphere guides: outline, equator, and one meridian.
  svg.circle(cx, cy, radius, 'fill="none" stroke="#bbbbbb" stroke-width="1"');
  const equator: [number, number][] = [];
  const meridian: [number, number][] = [];
  for (let i = 0; i <= 72; i++) {
    const a = (2 * Math.PI * i) / 72;
    equator.push(toPage([Math.cos(a), Math.sin(a), 0]));
    meridian.push(toPage([Math.cos(a), 0, Math.sin(a)]));
  }
  svg.path(equator, 'stroke="#dddddd" stroke-width="1"');
  svg.path(meridian, 'stroke="#dddddd" stroke-width="1"');
  for (const [label, m] of [
    ["+z", [0, 0, 1]],
    ["-z", [0, 0, -1]],
    ["+x", [1, 0, 0]],
  ] as [string, [number, number, number]][]) {
    const [px, py] = toPage(m);
    svg.text(px + 5, py, label, { size: 10 });
  }
  const path = points.map(toPage);
  svg.path(path, LINE);
  for (const [px, py] of path) {
    svg.circle(px, py, 3, 'fill="#1f77b4" stroke="none"');
  }
  const [ex, ey] = path[path.length - 1];
  svg.circle(ex, ey, 4, 'fill="#d62728" stroke="none"');
  return svg.toString();
}

/** K(t) on a log axis with a dashed line at the finite minimum. */
export function renderAdiabaticityPanel(panel: AdiabaticityPanel): string {
  const series = readAdiabaticityCsv(panel.adiabaticity_csv);
  const finite = series.filter((p) => Number.isFinite(p.k));
  const tMs = finite.map((p) => p.tSeconds * 1e3);
  const logK = finite.map((p) => Math.log10(p.k));
  const svg = new Svg(PANEL_WIDTH, PANEL_HEIGHT);
  const axes = drawAxes(svg, plotBox(), extent(tMs), extent(logK), {
    x: "time (ms)",
    y: "log10 K",
    title: panel.title ?? "adiabaticity",
  });
  svg.path(polyline(axes, tMs, logK), LINE);
  if (panel.annotate_min ?? true) {
    const minK = minAdiabaticity(panel.adiabaticity_csv);
    const py = axes.y(Math.log10(minK));
    const box = plotBox();
    svg.lineSeg(box.x0, py, box.x1, py, DASHED);
    svg.text(box.x1 - 6, py - 5, `min K = ${fmt(minK)}`, {
      size: 10,
      anchor: "end",
    });
  }
  return svg.toString();
}
