/** Standalone renderer: `node dist/main.js recipe.json`. */

import { loadRecipe } from "./recipe.js";
import { render } from "./render.js";

function main(): number {
  const path = process.argv[2];
  if (!path) {
    console.error("usage: main.js <recipe.json>");
    return 2;
  }
  let written: string[];
  try {
    written = render(loadRecipe(path));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  for (const file of written) console.log(file);
  return 0;
}

process.exit(main());
