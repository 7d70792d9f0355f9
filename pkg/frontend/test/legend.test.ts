import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { pulseEnergy, readMetricsCsv, readPulseCsv, readTable } from "../src/csv.js";
import { engReductionPercent, fmt, minAdiabaticity } from "../src/legend.js";

const FIX = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

/** Compare to 3 significant figures. */
function sig3(value: number): string {
  return value.toPrecision(3);
}

describe("legend recomputation vs fixture metrics", () => {
  it("recomputed ENG matches the metrics CSV to 3 significant figures", () => {
    const metrics = readMetricsCsv(join(FIX, "hs_metrics.csv"));
    const eng = pulseEnergy(readPulseCsv(join(FIX, "hs_pulse.csv")));
    expect(sig3(eng)).toBe(sig3(metrics.get("hs/eng")!));
  });

  it("recomputed ENG reduction matches the comparison CSV to 3 significant figures", () => {
    const table = readTable(join(FIX, "compare.csv"));
    const row = table.rows.find((r) => r.metric === "eng_reduction_percent")!;
    const recomputed = engReductionPercent(
      join(FIX, "hs_pulse.csv"),
      join(FIX, "hs_weak_pulse.csv"),
    );
    expect(sig3(recomputed)).toBe(sig3(Number(row.delta)));
  });

  it("minimum adiabaticity matches the fixture trace to 3 significant figures", () => {
    // Frozen from the 64-step HS fixture's adiabaticity trace.
    expect(sig3(minAdiabaticity(join(FIX, "hs_adiabaticity.csv")))).toBe("4.36");
  });

  it("fmt renders 3 significant figures without trailing zeros", () => {
    expect(fmt(3.6012)).toBe("3.6");
    expect(fmt(46.46044)).toBe("46.5");
    expect(fmt(0.0123456)).toBe("0.0123");
  });
});
