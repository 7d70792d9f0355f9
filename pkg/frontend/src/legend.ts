/** Legend values recomputed from the raw CSV artifacts. */

import { pulseEnergy, readAdiabaticityCsv, readPulseCsv } from "./csv.js";

/** (1 - ENG_candidate / ENG_reference) * 100, from the two pulse CSVs. */
export function engReductionPercent(
  referencePulseCsv: string,
  candidatePulseCsv: string,
): number {
  const ref = pulseEnergy(readPulseCsv(referencePulseCsv));
  const cand = pulseEnergy(readPulseCsv(candidatePulseCsv));
  return (1 - cand / ref) * 100;
}

/** Minimum finite adiabaticity K from a `t_seconds,k` CSV. */
export function minAdiabaticity(adiabaticityCsv: string): number {
  const finite = readAdiabaticityCsv(adiabaticityCsv)
    .map((p) => p.k)
    .filter((k) => Number.isFinite(k));
  if (finite.length === 0) {
    throw new Error(`no finite adiabaticity samples in ${adiabaticityCsv}`);
  }
  return Math.min(...finite);
}

/** Fixed-precision number formatting for annotations (3 significant figures). */
export function fmt(value: number): string {
  return Number(value.toPrecision(3)).toString();
}
