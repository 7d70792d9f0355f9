/** Validate a recipe and write one SVG per panel. */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import {
  renderAdiabaticityPanel,
  renderMapPanel,
  renderProfilePanel,
  renderPulsePanel,
  renderTrajectoryPanel,
} from "./panels.js";
import { validateRecipe, type FigureRecipe, type Panel } from "./recipe.js";

export function renderPanel(panel: Panel): string {
  switch (panel.type) {
    case "pulse":
      return renderPulsePanel(panel);
    case "profile":
      return renderProfilePanel(panel);
    case "map":
      return renderMapPanel(panel);
    case "trajectory":
      return renderTrajectoryPanel(panel);
    case "adiabaticity":
      return renderAdiabaticityPanel(panel);
  }
}

/** Render every panel of a validated recipe; returns the written paths. */
export function render(recipe: FigureRecipe): string[] {
  validateRecipe(recipe);
  mkdirSync(recipe.out_dir, { recursive: true });
  const written: string[] = [];
  for (const panel of recipe.panels) {
    const path = join(recipe.out_dir, `${panel.name}.svg`);
    writeFileSync(path, renderPanel(panel));
    written.push(path);
  }
  return written;
}
