/** Canvas rendering of the annotation view.
 *
 * Draws the background image, the server-computed grid lattice verbatim,
 * translucent label fills (obstacle red, walkable white, entrance green),
 * and the six calibration point handles, all under one zoom/pan
 * transform.
 */

import { GridResponse, Point } from "./api.js";
import { AnnotationSession, CellLabel, POINT_NAMES } from "./session.js";

export const LABEL_FILLS: Record<CellLabel, string> = {
  O: "rgba(220, 50, 47, 0.35)",
  W: "rgba(255, 255, 255, 0.15)",
  E: "rgba(60, 180, 75, 0.35)",
};

const POINT_COLOR = "#268bd2";
const GRID_COLOR = "rgba(38, 139, 210, 0.8)";

/** Image-space <-> screen-space mapping with zoom and pan. */
export class Viewport {
  scale = 1;
  offsetX = 0;
  offsetY = 0;

  toScreen(p: Point): Point {
    return [p[0] * this.scale + this.offsetX, p[1] * this.scale + this.offsetY];
  }

  toImage(p: Point): Point {
    return [(p[0] - this.offsetX) / this.scale, (p[1] - this.offsetY) / this.scale];
  }

  /** Zoom by a factor keeping the given screen point fixed. */
  zoomAt(screen: Point, factor: number): void {
    const before = this.toImage(screen);
    this.scale = Math.min(16, Math.max(0.25, this.scale * factor));
    this.offsetX = screen[0] - before[0] * this.scale;
    this.offsetY = screen[1] - before[1] * this.scale;
  }

  pan(dx: number, dy: number): void {
    this.offsetX += dx;
    this.offsetY += dy;
  }
}

function cellPolygon(grid: GridResponse, r: number, c: number): Point[] {
  const cs = grid.corners;
  return [
    cs[r][c] as Point,
    cs[r][c + 1] as Point,
    cs[r + 1][c + 1] as Point,
    cs[r + 1][c] as Point,
  ];
}

/** Grid cell whose quad contains the image point, or null. */
export function cellAt(grid: GridResponse, p: Point): [number, number] | null {
  for (let r = 0; r < grid.rows; r++) {
    for (let c = 0; c < grid.cols; c++) {
      if (pointInPolygon(p, cellPolygon(grid, r, c))) return [r, c];
    }
  }
  return null;
}

export function pointInPolygon(p: Point, poly: Point[]): boolean {
  let inside = false;
  for (let a = 0, b = poly.length - 1; a < poly.length; b = a++) {
    const [xa, ya] = poly[a];
    const [xb, yb] = poly[b];
    if (ya > p[1] !== yb > p[1]) {
      const x = ((xb - xa) * (p[1] - ya)) / (yb - ya) + xa;
      if (p[0] < x) inside = !inside;
    }
  }
  return inside;
}

export function render(
  ctx: CanvasRenderingContext2D,
  session: AnnotationSession,
  view: Viewport,
  background: CanvasImageSource | null,
): void {
  ctx.save();
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.translate(view.offsetX, view.offsetY);
  ctx.scale(view.scale, view.scale);

  if (background) {
    ctx.drawImage(background, 0, 0);
  }

  const grid = session.grid;
  if (grid) {
    for (let r = 0; r < grid.rows; r++) {
      for (let c = 0; c < grid.cols; c++) {
        const poly = cellPolygon(grid, r, c);
        ctx.beginPath();
        ctx.moveTo(poly[0][0], poly[0][1]);
        for (const [x, y] of poly.slice(1)) ctx.lineTo(x, y);
        ctx.closePath();
        ctx.fillStyle = LABEL_FILLS[session.labels[r]?.[c] ?? "W"];
        ctx.fill();
        ctx.strokeStyle = GRID_COLOR;
        ctx.lineWidth = 1 / view.scale;
        ctx.stroke();
      }
    }
  }

  ctx.fillStyle = POINT_COLOR;
  ctx.font = `${12 / view.scale}px sans-serif`;
  for (const name of POINT_NAMES) {
    const p = session.points[name];
    if (!p) continue;
    ctx.beginPath();
    ctx.arc(p[0], p[1], 4 / view.scale, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText(name, p[0] + 6 / view.scale, p[1] - 6 / view.scale);
  }
  ctx.restore();
}
