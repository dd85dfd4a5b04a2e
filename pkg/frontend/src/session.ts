/** Annotation session state: calibration points, server grid, cell labels.
 *
 * The session owns all unsaved state (the backend is stateless).  Grid
 * geometry is whatever the server last returned, verbatim; a failed grid
 * request keeps the previous overlay so a bad drag never wipes work.
 */

import {
  ApiClient,
  ApiError,
  BackendError,
  Calibration,
  GridRequester,
  GridResponse,
  Point,
  SceneDocument,
} from "./api.js";

export type PointName = "i" | "j" | "k" | "l" | "u1" | "u2";
export type CellLabel = "W" | "O" | "E";

export const POINT_NAMES: PointName[] = ["i", "j", "k", "l", "u1", "u2"];
export const SNAP_RADIUS_PX = 8;

export interface SessionOptions {
  agentHeightWorld: number;
  sourceFps: number;
  backgroundPath: string;
  estimatedAgents: number;
}

const DEFAULT_OPTIONS: SessionOptions = {
  agentHeightWorld: 1.8,
  sourceFps: 25,
  backgroundPath: "background.png",
  estimatedAgents: 8,
};

function cloneLabels(labels: CellLabel[][]): CellLabel[][] {
  return labels.map((row) => row.slice());
}

export class AnnotationSession {
  readonly points: Partial<Record<PointName, Point>> = {};
  grid: GridResponse | null = null;
  gridError: ApiError | null = null;
  labels: CellLabel[][] = [];
  dirty = false;

  private readonly requester: GridRequester;
  private readonly undoStack: CellLabel[][][] = [];
  private pendingImportLabels: CellLabel[][] | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly imageWidth: number,
    readonly imageHeight: number,
    readonly options: SessionOptions = DEFAULT_OPTIONS,
  ) {
    this.requester = new GridRequester(api);
  }

  allPointsPlaced(): boolean {
    return POINT_NAMES.every((n) => this.points[n] !== undefined);
  }

  /** Nearest placed point within the snap radius, for drag pickup. */
  hitTest(p: Point, radius: number = SNAP_RADIUS_PX): PointName | null {
    let best: PointName | null = null;
    let bestDist = radius;
    for (const name of POINT_NAMES) {
      const q = this.points[name];
      if (!q) continue;
      const d = Math.hypot(p[0] - q[0], p[1] - q[1]);
      if (d <= bestDist) {
        best = name;
        bestDist = d;
      }
    }
    return best;
  }

  /** Place or move one calibration point; refreshes the overlay once all
   * six exist.  Resolves after any triggered grid request settles. */
  async placeOrDragPoint(name: PointName, p: Point): Promise<void> {
    this.points[name] = [p[0], p[1]];
    this.dirty = true;
    if (this.allPointsPlaced()) {
      await this.refreshGrid();
    }
  }

  calibration(): Calibration {
    if (!this.allPointsPlaced()) {
      throw new Error("calibration requires all six points");
    }
    const g = (n: PointName): Point => {
      const p = this.points[n]!;
      return [p[0], p[1]];
    };
    return {
      i: g("i"), j: g("j"), k: g("k"), l: g("l"), u1: g("u1"), u2: g("u2"),
      image_width: this.imageWidth,
      image_height: this.imageHeight,
    };
  }

  private async refreshGrid(): Promise<void> {
    let response: GridResponse | null;
    try {
      response = await this.requester.request(this.calibration());
    } catch (err) {
      if (err instanceof BackendError) {
        // keep the previous grid and labels; surface the message inline
        this.gridError = { code: err.code, message: err.message };
        return;
      }
      throw err;
    }
    if (response === null) return; // a newer drag superseded this request
    this.gridError = null;
    this.grid = response;
    const imported = this.pendingImportLabels;
    this.pendingImportLabels = null;
    if (
      imported &&
      imported.length === response.rows &&
      imported[0]?.length === response.cols
    ) {
      this.labels = imported;
    } else if (
      this.labels.length !== response.rows ||
      this.labels[0]?.length !== response.cols
    ) {
      this.labels = Array.from({ length: response.rows }, () =>
        Array.from({ length: response.cols }, () => "W" as CellLabel),
      );
      this.undoStack.length = 0;
    }
  }

  private requireLabels(): void {
    if (!this.grid) throw new Error("no grid yet; place all six points first");
  }

  /** Paint an inclusive cell rectangle; one undo step per call. */
  paintCells(label: CellLabel, r0: number, c0: number, r1: number, c1: number): void {
    this.requireLabels();
    this.undoStack.push(cloneLabels(this.labels));
    const [rlo, rhi] = r0 <= r1 ? [r0, r1] : [r1, r0];
    const [clo, chi] = c0 <= c1 ? [c0, c1] : [c1, c0];
    for (let r = Math.max(0, rlo); r <= Math.min(this.grid!.rows - 1, rhi); r++) {
      for (let c = Math.max(0, clo); c <= Math.min(this.grid!.cols - 1, chi); c++) {
        this.labels[r][c] = label;
      }
    }
    this.dirty = true;
  }

  /** Repaint the 4-connected region of same-labeled cells around (r, c). */
  floodFill(label: CellLabel, r: number, c: number): void {
    this.requireLabels();
    const rows = this.grid!.rows;
    const cols = this.grid!.cols;
    if (r < 0 || r >= rows || c < 0 || c >= cols) return;
    const from = this.labels[r][c];
    if (from === label) return;
    this.undoStack.push(cloneLabels(this.labels));
    const stack: Array<[number, number]> = [[r, c]];
    while (stack.length) {
      const [cr, cc] = stack.pop()!;
      if (cr < 0 || cr >= rows || cc < 0 || cc >= cols) continue;
      if (this.labels[cr][cc] !== from) continue;
      this.labels[cr][cc] = label;
      stack.push([cr - 1, cc], [cr + 1, cc], [cr, cc - 1], [cr, cc + 1]);
    }
    this.dirty = true;
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) return false;
    this.labels = prev;
    return true;
  }

  entranceCount(): number {
    return this.labels.flat().filter((l) => l === "E").length;
  }

  canExport(): boolean {
    return (
      this.allPointsPlaced() &&
      this.grid !== null &&
      this.gridError === null &&
      this.entranceCount() > 0
    );
  }

  sceneDocument(): SceneDocument {
    return {
      calibration: this.calibration(),
      labels: cloneLabels(this.labels),
      agent_height_world: this.options.agentHeightWorld,
      source_fps: this.options.sourceFps,
      background_path: this.options.backgroundPath,
      estimated_agents: this.options.estimatedAgents,
    };
  }

  /** Validate server-side and hand back the export document. */
  async exportScene(): Promise<SceneDocument> {
    if (!this.canExport()) {
      throw new Error(
        "export needs all six points, a valid grid, and at least one entrance",
      );
    }
    const doc = this.sceneDocument();
    const verdict = await this.api.validateScene(doc);
    if (!verdict.ok) {
      const first = verdict.errors?.[0];
      throw new BackendError(
        first ?? { code: "InvalidScene", message: "scene rejected by server" },
      );
    }
    this.dirty = false;
    return doc;
  }

  /** Rebuild a session from a previously exported document. */
  static async fromScene(api: ApiClient, doc: SceneDocument): Promise<AnnotationSession> {
    const session = new AnnotationSession(
      api,
      doc.calibration.image_width,
      doc.calibration.image_height,
      {
        agentHeightWorld: doc.agent_height_world,
        sourceFps: doc.source_fps,
        backgroundPath: doc.background_path,
        estimatedAgents: doc.estimated_agents,
      },
    );
    session.pendingImportLabels = doc.labels.map(
      (row) => row.slice() as CellLabel[],
    );
    for (const name of POINT_NAMES.slice(0, 5)) {
      session.points[name] = [...doc.calibration[name]];
    }
    await session.placeOrDragPoint("u2", [...doc.calibration.u2]);
    session.dirty = false;
    return session;
  }
}
