import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { MissingColumnError, readPulseCsv } from "../src/csv.js";
import { loadRecipe, validateRecipe, type FigureRecipe } from "../src/recipe.js";

const FIX = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
const RECIPE = join(FIX, "recipe.json");

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

describe("loadRecipe", () => {
  it("resolves CSV paths relative to the recipe file", () => {
    const recipe = loadRecipe(RECIPE);
    expect(recipe.panels).toHaveLength(5);
    const pulse = recipe.panels[0];
    expect(pulse.type).toBe("pulse");
    if (pulse.type === "pulse") {
      expect(pulse.pulse_csv).toBe(join(FIX, "hs_pulse.csv"));
      readPulseCsv(pulse.pulse_csv);
    }
  });
});

describe("validateRecipe", () => {
  it("accepts the fixture recipe", () => {
    expect(() => validateRecipe(loadRecipe(RECIPE))).not.toThrow();
  });

  it("raises a named error for a missing column", () => {
    const dir = tempDir();
    const bad = join(dir, "bad_profile.csv");
    // Profile CSV without its mz column.
    writeFileSync(bad, "b1_scale,offset_hz,mx,my\n1.0,0.0,0.0,0.0\n");
    const recipe: FigureRecipe = {
      out_dir: dir,
      panels: [{ type: "profile", name: "p", profile_csv: bad }],
    };
    expect(() => validateRecipe(recipe)).toThrowError(MissingColumnError);
    try {
      validateRecipe(recipe);
    } catch (err) {
      expect((err as MissingColumnError).name).toBe("MissingColumnError");
      expect((err as MissingColumnError).column).toBe("mz");
      expect((err as Error).message).toContain("mz");
      expect((err as Error).message).toContain(bad);
    }
  });

  it("rejects a pulse CSV without the dt header", () => {
    const dir = tempDir();
    const bad = join(dir, "no_dt.csv");
    writeFileSync(bad, "index,amplitude_gauss,phase_rad\n0,0.1,0.0\n");
    const recipe: FigureRecipe = {
      out_dir: dir,
      panels: [{ type: "pulse", name: "p", pulse_csv: bad }],
    };
    expect(() => validateRecipe(recipe)).toThrowError(/dt_seconds/);
  });

  it("rejects a trajectory point absent from a snapshot grid", () => {
    const recipe: FigureRecipe = {
      out_dir: tempDir(),
      panels: [
        {
          type: "trajectory",
          name: "t",
          profile_csvs: [join(FIX, "hs_snapshot_16.csv")],
          b1_scale: 7.0,
          offset_hz: 0.0,
        },
      ],
    };
    expect(() => validateRecipe(recipe)).toThrowError(/absent/);
  });

  it("rejects unknown panel types, duplicates, and empty zooms", () => {
    const profile = join(FIX, "hs_profile.csv");
    expect(() =>
      validateRecipe({
        out_dir: tempDir(),
        panels: [{ type: "waterfall", name: "w" } as never],
      }),
    ).toThrowError(/unknown panel type/);
    expect(() =>
      validateRecipe({
        out_dir: tempDir(),
        panels: [
          { type: "map", name: "m", profile_csv: profile },
          { type: "map", name: "m", profile_csv: profile },
        ],
      }),
    ).toThrowError(/duplicate/);
    expect(() =>
      validateRecipe({
        out_dir: tempDir(),
        panels: [
          { type: "profile", name: "p", profile_csv: profile, zoom: [100, -100] },
        ],
      }),
    ).toThrowError(/zoom/);
  });

  it("rejects an empty panel list", () => {
    expect(() => validateRecipe({ out_dir: tempDir(), panels: [] })).toThrowError(
      /no panels/,
    );
  });
});

describe("fixture integrity", () => {
  it("zero-pulse profile is flat mz = 1", () => {
    const text = readFileSync(join(FIX, "zero_profile.csv"), "utf-8");
    const rows = text.trim().split("\n").slice(1);
    for (const row of rows) {
      expect(Number(row.split(",")[4])).toBe(1.0);
    }
  });
});
