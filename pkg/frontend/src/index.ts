export * from "./csv.js";
export * from "./legend.js";
export * from "./recipe.js";
export * from "./render.js";
export * from "./panels.js";
