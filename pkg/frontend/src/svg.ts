/** Deterministic SVG primitives: fixed fonts, sizes, and number formatting. */

import { scaleLinear, type ScaleLinear } from "d3-scale";
import { line } from "d3-shape";

export const FONT = 'font-family="Helvetica, Arial, sans-serif"';
export const PANEL_WIDTH = 480;
export const PANEL_HEIGHT = 320;

export interface Margin {
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const MARGIN: Margin = { left: 56, right: 16, top: 28, bottom: 40 };

/** Fixed short formatting so output never depends on locale. */
export function num(value: number): string {
  if (!Number.isFinite(value)) return value > 0 ? "inf" : "-inf";
  const abs = Math.abs(value);
  if (value !== 0 && (abs >= 1e4 || abs < 1e-3)) return value.toExponential(2);
  return Number(value.toPrecision(4)).toString();
}

export class Svg {
  private parts: string[] = [];

  constructor(public readonly width: number, public readonly height: number) {}

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  text(
    x: number,
    y: number,
    label: string,
    opts: { size?: number; anchor?: string; extra?: string } = {},
  ): void {
    const size = opts.size ?? 11;
    const anchor = opts.anchor ?? "start";
    const extra = opts.extra ?? "";
    this.parts.push(
      `<text x="${num(x)}" y="${num(y)}" ${FONT} font-size="${size}" ` +
        `text-anchor="${anchor}" ${extra}>${label}</text>`,
    );
  }

  lineSeg(x1: number, y1: number, x2: number, y2: number, style: string): void {
    this.parts.push(
      `<line x1="${num(x1)}" y1="${num(y1)}" x2="${num(x2)}" y2="${num(y2)}" ${style}/>`,
    );
  }

  path(points: [number, number][], style: string): void {
    const gen = line<[number, number]>()
      .x((p) => Number(num(p[0])))
      .y((p) => Number(num(p[1])));
    this.parts.push(`<path d="${gen(points) ?? ""}" fill="none" ${style}/>`);
  }

  rect(x: number, y: number, w: number, h: number, style: string): void {
    this.parts.push(
      `<rect x="${num(x)}" y="${num(y)}" width="${num(w)}" height="${num(h)}" ${style}/>`,
    );
  }

  circle(cx: number, cy: number, r: number, style: string): void {
    this.parts.push(
      `<circle cx="${num(cx)}" cy="${num(cy)}" r="${num(r)}" ${style}/>`,
    );
  }

  toString(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      '<rect width="100%" height="100%" fill="white"/>\n' +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export interface Axes {
  x: ScaleLinear<number, number>;
  y: ScaleLinear<number, number>;
}

/** Draw a framed axis box with ticks and labels; return the two scales. */
export function drawAxes(
  svg: Svg,
  box: { x0: number; y0: number; x1: number; y1: number },
  xDomain: [number, number],
  yDomain: [number, number],
  labels: { x?: string; y?: string; title?: string } = {},
  ticks = 5,
): Axes {
  const x = scaleLinear().domain(xDomain).range([box.x0, box.x1]);
  const y = scaleLinear().domain(yDomain).range([box.y1, box.y0]);
  const frame = 'stroke="black" stroke-width="1"';
  svg.rect(box.x0, box.y0, box.x1 - box.x0, box.y1 - box.y0, `fill="none" ${frame}`);
  for (const t of x.ticks(ticks)) {
    const px = x(t);
    svg.lineSeg(px, box.y1, px, box.y1 + 4, frame);
    svg.text(px, box.y1 + 16, num(t), { size: 9, anchor: "middle" });
  }
  for (const t of y.ticks(ticks)) {
    const py = y(t);
    svg.lineSeg(box.x0 - 4, py, box.x0, py, frame);
    svg.text(box.x0 - 6, py + 3, num(t), { size: 9, anchor: "end" });
  }
  if (labels.x) {
    svg.text((box.x0 + box.x1) / 2, box.y1 + 30, labels.x, {
      size: 11,
      anchor: "middle",
    });
  }
  if (labels.y) {
    const cx = box.x0 - 40;
    const cy = (box.y0 + box.y1) / 2;
    svg.text(cx, cy, labels.y, {
      size: 11,
      anchor: "middle",
      extra: `transform="rotate(-90 ${num(cx)} ${num(cy)})"`,
    });
  }
  if (labels.title) {
    svg.text((box.x0 + box.x1) / 2, box.y0 - 8, labels.title, {
      size: 12,
      anchor: "middle",
    });
  }
  return { x, y };
}

/** Span of an array, widened slightly when degenerate. */
export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  return [lo, hi];
}
