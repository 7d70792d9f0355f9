/** Readers for the pulsekit CSV artifacts. */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export class MissingColumnError extends Error {
  constructor(public readonly column: string, public readonly file: string) {
    super(`missing column "${column}" in ${file}`);
    this.name = "MissingColumnError";
  }
}

export interface Table {
  file: string;
  columns: string[];
  rows: Record<string, string>[];
}

/** Parse a CSV file into header columns and string-valued rows. */
export function readTable(file: string): Table {
  const text = readFileSync(file, "utf-8");
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    comments: "#",
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`failed to parse ${file}: ${parsed.errors[0].message}`);
  }
  return { file, columns: parsed.meta.fields ?? [], rows: parsed.data };
}

/** Assert the table has every listed column, else raise a named error. */
export function requireColumns(table: Table, columns: string[]): void {
  for (const column of columns) {
    if (!table.columns.includes(column)) {
      throw new MissingColumnError(column, table.file);
    }
  }
}

/** Numeric values of one column. */
export function numericColumn(table: Table, column: string): number[] {
  requireColumns(table, [column]);
  return table.rows.map((row) => Number(row[column]));
}

export interface Pulse {
  dtSeconds: number;
  amplitudeGauss: number[];
  phaseRad: number[];
}

/** Read an `index,amplitude_gauss,phase_rad` pulse CSV with its dt header. */
export function readPulseCsv(file: string): Pulse {
  const text = readFileSync(file, "utf-8");
  const match = text.match(/^#\s*dt_seconds=([0-9eE+.-]+)/);
  if (!match) {
    throw new Error(`missing "# dt_seconds=" header in ${file}`);
  }
  const table = readTable(file);
  requireColumns(table, ["index", "amplitude_gauss", "phase_rad"]);
  return {
    dtSeconds: Number(match[1]),
    amplitudeGauss: numericColumn(table, "amplitude_gauss"),
    phaseRad: numericColumn(table, "phase_rad"),
  };
}

/** Pulse energy in Gauss^2 * second: sum(amplitude^2) * dt. */
export function pulseEnergy(pulse: Pulse): number {
  let total = 0;
  for (const a of pulse.amplitudeGauss) total += a * a;
  return total * pulse.dtSeconds;
}

export interface ProfileRow {
  b1Scale: number;
  offsetHz: number;
  mx: number;
  my: number;
  mz: number;
}

/** Read a `b1_scale,offset_hz,mx,my,mz` profile CSV. */
export function readProfileCsv(file: string): ProfileRow[] {
  const table = readTable(file);
  requireColumns(table, ["b1_scale", "offset_hz", "mx", "my", "mz"]);
  return table.rows.map((row) => ({
    b1Scale: Number(row.b1_scale),
    offsetHz: Number(row.offset_hz),
    mx: Number(row.mx),
    my: Number(row.my),
    mz: Number(row.mz),
  }));
}

/** Read a `pulse_id,metric,value` metrics CSV as "pulse_id/metric" -> value. */
export function readMetricsCsv(file: string): Map<string, number> {
  const table = readTable(file);
  requireColumns(table, ["pulse_id", "metric", "value"]);
  const out = new Map<string, number>();
  for (const row of table.rows) {
    out.set(`${row.pulse_id}/${row.metric}`, Number(row.value));
  }
  return out;
}

export interface AdiabaticityPoint {
  tSeconds: number;
  k: number;
}

/** Read a `t_seconds,k` adiabaticity CSV; "inf" parses to Infinity. */
export function readAdiabaticityCsv(file: string): AdiabaticityPoint[] {
  const table = readTable(file);
  requireColumns(table, ["t_seconds", "k"]);
  return table.rows.map((row) => ({
    tSeconds: Number(row.t_seconds),
    k: row.k === "inf" ? Infinity : Number(row.k),
  }));
}

/** Read a `metric,reference,candidate,delta` comparison CSV; metric -> delta. */
export function readCompareCsv(file: string): Map<string, number> {
  const table = readTable(file);
  requireColumns(table, ["metric", "reference", "candidate", "delta"]);
  const out = new Map<string, number>();
  for (const row of table.rows) {
    out.set(row.metric, Number(row.delta));
  }
  return out;
}
