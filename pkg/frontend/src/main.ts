/** DOM wiring for the annotation tool.
 *
 * Toolbar modes: place/drag calibration points, paint cells with one of
 * the three labels, flood fill, undo, export.  Scroll wheel zooms around
 * the cursor; middle-drag pans.
 */

import { ApiClient } from "./api.js";
import { AnnotationSession, CellLabel, PointName, POINT_NAMES } from "./session.js";
import { cellAt, render, Viewport } from "./overlay.js";

type Mode = { kind: "points" } | { kind: "paint"; label: CellLabel } | { kind: "fill"; label: CellLabel };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const sceneName = params.get("scene") ?? "background";
  const baseUrl = params.get("api") ?? "http://127.0.0.1:8000";
  const api = new ApiClient(baseUrl);

  const canvas = el<HTMLCanvasElement>("view");
  const ctx = canvas.getContext("2d")!;
  const status = el<HTMLSpanElement>("status");
  const exportBtn = el<HTMLButtonElement>("export");

  const image = new Image();
  image.crossOrigin = "anonymous";
  image.src = api.backgroundUrl(sceneName);
  await image.decode();
  canvas.width = image.width;
  canvas.height = image.height;

  const session = new AnnotationSession(api, image.width, image.height, {
    agentHeightWorld: Number(params.get("height") ?? 1.8),
    sourceFps: Number(params.get("fps") ?? 25),
    backgroundPath: `${sceneName}.png`,
    estimatedAgents: Number(params.get("agents") ?? 8),
  });
  const view = new Viewport();
  let mode: Mode = { kind: "points" };
  let nextPoint = 0;
  let dragging: PointName | null = null;
  let panning: [number, number] | null = null;
  let paintAnchor: [number, number] | null = null;

  const repaint = () => {
    render(ctx, session, view, image);
    if (session.gridError) {
      status.textContent = `${session.gridError.code}: ${session.gridError.message}`;
    } else if (!session.allPointsPlaced()) {
      status.textContent = `place point ${POINT_NAMES[nextPoint]}`;
    } else {
      status.textContent = `${session.grid?.rows ?? 0} x ${session.grid?.cols ?? 0} cells, ${session.entranceCount()} entrances`;
    }
    exportBtn.disabled = !session.canExport();
  };

  for (const name of ["points", "walkable", "obstacle", "entrance", "fill"] as const) {
    el<HTMLButtonElement>(name).addEventListener("click", () => {
      mode =
        name === "points"
          ? { kind: "points" }
          : name === "fill"
            ? { kind: "fill", label: "W" }
            : { kind: "paint", label: name === "walkable" ? "W" : name === "obstacle" ? "O" : "E" };
    });
  }
  el<HTMLButtonElement>("undo").addEventListener("click", () => {
    session.undo();
    repaint();
  });
  exportBtn.addEventListener("click", async () => {
    try {
      const doc = await session.exportScene();
      const blob = new Blob([JSON.stringify(doc, null, 2)], { type: "application/json" });
      const link = document.createElement("a");
      link.href = URL.createObjectURL(blob);
      link.download = "scene.json";
      link.click();
      URL.revokeObjectURL(link.href);
    } catch (err) {
      status.textContent = String(err);
    }
  });

  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    view.zoomAt([ev.offsetX, ev.offsetY], ev.deltaY < 0 ? 1.2 : 1 / 1.2);
    repaint();
  });

  canvas.addEventListener("mousedown", (ev) => {
    if (ev.button === 1) {
      panning = [ev.offsetX, ev.offsetY];
      return;
    }
    const p = view.toImage([ev.offsetX, ev.offsetY]);
    if (mode.kind === "points") {
      dragging = session.hitTest(p, 8 / view.scale);
      if (!dragging && nextPoint < POINT_NAMES.length) {
        const name = POINT_NAMES[nextPoint++];
        void session.placeOrDragPoint(name, p).then(repaint);
      }
    } else if (session.grid) {
      const cell = cellAt(session.grid, p);
      if (!cell) return;
      if (mode.kind === "fill") {
        session.floodFill(mode.label, cell[0], cell[1]);
        repaint();
      } else {
        paintAnchor = cell;
        session.paintCells(mode.label, cell[0], cell[1], cell[0], cell[1]);
        repaint();
      }
    }
  });

  canvas.addEventListener("mousemove", (ev) => {
    if (panning) {
      view.pan(ev.offsetX - panning[0], ev.offsetY - panning[1]);
      panning = [ev.offsetX, ev.offsetY];
      repaint();
      return;
    }
    const p = view.toImage([ev.offsetX, ev.offsetY]);
    if (dragging) {
      void session.placeOrDragPoint(dragging, p).then(repaint);
    } else if (paintAnchor && mode.kind === "paint" && session.grid) {
      const cell = cellAt(session.grid, p);
      if (cell) {
        session.undo(); // collapse the drag into one undo step
        session.paintCells(mode.label, paintAnchor[0], paintAnchor[1], cell[0], cell[1]);
        repaint();
      }
    }
  });

  window.addEventListener("mouseup", () => {
    dragging = null;
    panning = null;
    paintAnchor = null;
  });

  repaint();
}

if (typeof document !== "undefined" && document.getElementById("view")) {
  void start();
}
