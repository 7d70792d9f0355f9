/** Figure recipes: which CSVs feed which panels, plus validation. */

import { readFileSync } from "node:fs";
import { dirname, isAbsolute, join } from "node:path";
import {
  readAdiabaticityCsv,
  readProfileCsv,
  readPulseCsv,
  readTable,
  requireColumns,
} from "./csv.js";

export interface PanelBase {
  /** Output file stem; the renderer writes `<name>.svg`. */
  name: string;
  title?: string;
}

/** Amplitude and phase waveforms of one pulse CSV. */
export interface PulsePanel extends PanelBase {
  type: "pulse";
  pulse_csv: string;
}

/** 1-D profile vs frequency offset, optional overlay and zoom inset. */
export interface ProfilePanel extends PanelBase {
  type: "profile";
  profile_csv: string;
  overlay_csv?: string;
  b1_scale?: number;
  component?: "mz" | "transverse";
  /** Offset range [lo, hi] Hz shown in a corner inset. */
  zoom?: [number, number];
  /** Pulse CSVs whose recomputed ENG reduction is printed in the legend. */
  legend_pulses?: { reference: string; candidate: string };
}

/** 2-D B1-scale x offset map colored by Mz. */
export interface MapPanel extends PanelBase {
  type: "map";
  profile_csv: string;
}

/** 3-D magnetization path through time-ordered profile snapshots. */
export interface TrajectoryPanel extends PanelBase {
  type: "trajectory";
  profile_csvs: string[];
  b1_scale: number;
  offset_hz: number;
}

/** Adiabaticity K(t) with an optional dashed minimum line. */
export interface AdiabaticityPanel extends PanelBase {
  type: "adiabaticity";
  adiabaticity_csv: string;
  annotate_min?: boolean;
}

export type Panel =
  | PulsePanel
  | ProfilePanel
  | MapPanel
  | TrajectoryPanel
  | AdiabaticityPanel;

export interface FigureRecipe {
  out_dir: string;
  panels: Panel[];
}

export const PANEL_TYPES = [
  "pulse",
  "profile",
  "map",
  "trajectory",
  "adiabaticity",
] as const;

function fail(message: string): never {
  throw new Error(message);
}

/** Read a recipe JSON file, resolving CSV paths relative to the file. */
export function loadRecipe(path: string): FigureRecipe {
  const raw = JSON.parse(readFileSync(path, "utf-8"));
  const base = dirname(path);
  const resolve = (p: string) => (isAbsolute(p) ? p : join(base, p));
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    fail(`recipe root must be an object: ${path}`);
  }
  if (typeof raw.out_dir !== "string") fail(`recipe needs "out_dir": ${path}`);
  if (!Array.isArray(raw.panels)) fail(`recipe needs "panels": ${path}`);
  const panels = raw.panels.map((p: Record<string, unknown>, i: number) => {
    const panel = { ...p } as Record<string, unknown>;
    for (const key of ["pulse_csv", "profile_csv", "overlay_csv", "adiabaticity_csv"]) {
      if (typeof panel[key] === "string") panel[key] = resolve(panel[key] as string);
    }
    if (Array.isArray(panel.profile_csvs)) {
      panel.profile_csvs = panel.profile_csvs.map((p2: string) => resolve(p2));
    }
    const lp = panel.legend_pulses as Record<string, string> | undefined;
    if (lp) {
      panel.legend_pulses = {
        reference: resolve(lp.reference),
        candidate: resolve(lp.candidate),
      };
    }
    if (typeof panel.name !== "string") panel.name = `panel_${i}`;
    return panel as unknown as Panel;
  });
  return { out_dir: resolve(raw.out_dir), panels };
}

/**
 * Check every panel's inputs: files parse and every referenced column exists.
 * Throws MissingColumnError for absent columns, Error for other defects.
 */
export function validateRecipe(recipe: FigureRecipe): void {
  if (recipe.panels.length === 0) fail("recipe has no panels");
  const seen = new Set<string>();
  for (const panel of recipe.panels) {
    if (!PANEL_TYPES.includes(panel.type)) {
      fail(`unknown panel type "${(panel as PanelBase & { type: string }).type}"`);
    }
    if (seen.has(panel.name)) fail(`duplicate panel name "${panel.name}"`);
    seen.add(panel.name);
    switch (panel.type) {
      case "pulse":
        readPulseCsv(panel.pulse_csv);
        break;
      case "profile": {
        requireColumns(readTable(panel.profile_csv), [
          "b1_scale",
          "offset_hz",
          "mx",
          "my",
          "mz",
        ]);
        if (panel.overlay_csv) readProfileCsv(panel.overlay_csv);
        if (panel.zoom && panel.zoom[0] >= panel.zoom[1]) {
          fail(`empty zoom range in panel "${panel.name}"`);
        }
        if (panel.legend_pulses) {
          readPulseCsv(panel.legend_pulses.reference);
          readPulseCsv(panel.legend_pulses.candidate);
        }
        break;
      }
      case "map":
        readProfileCsv(panel.profile_csv);
        break;
      case "trajectory": {
        if (panel.profile_csvs.length === 0) {
          fail(`panel "${panel.name}" lists no profile CSVs`);
        }
        for (const file of panel.profile_csvs) {
          const rows = readProfileCsv(file);
          const hit = rows.some(
            (r) => r.b1Scale === panel.b1_scale && r.offsetHz === panel.offset_hz,
          );
          if (!hit) {
            fail(
              `grid point (${panel.b1_scale}, ${panel.offset_hz}) absent from ${file}`,
            );
          }
        }
        break;
      }
      case "adiabaticity":
        readAdiabaticityCsv(panel.adiabaticity_csv);
        break;
    }
  }
}
