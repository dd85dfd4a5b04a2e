/** Thin typed client for the annotation backend.
 *
 * All grid geometry comes from the server; the client never computes
 * perspective itself.
 */

export type Point = [number, number];

export interface Calibration {
  i: Point;
  j: Point;
  k: Point;
  l: Point;
  u1: Point;
  u2: Point;
  image_width: number;
  image_height: number;
}

export interface GridResponse {
  rows: number;
  cols: number;
  vanish: Point;
  /** (rows+1) x (cols+1) x 2 lattice of cell corner pixels. */
  corners: number[][][];
}

export interface ApiError {
  code: string;
  message: string;
}

export interface ValidateResponse {
  ok: boolean;
  rows?: number;
  cols?: number;
  errors?: ApiError[];
}

export interface SceneDocument {
  calibration: Calibration;
  labels: string[][];
  agent_height_world: number;
  source_fps: number;
  background_path: string;
  estimated_agents: number;
}

export class BackendError extends Error {
  readonly code: string;

  constructor(err: ApiError) {
    super(err.message);
    this.code = err.code;
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) {
      throw new BackendError(payload as ApiError);
    }
    return payload as T;
  }

  grid(calibration: Calibration): Promise<GridResponse> {
    return this.post<GridResponse>("/grid", calibration);
  }

  validateScene(scene: SceneDocument): Promise<ValidateResponse> {
    return this.post<ValidateResponse>("/scene/validate", scene);
  }

  backgroundUrl(scene: string): string {
    return `${this.baseUrl}/background/${scene}`;
  }
}

/**
 * Latest-wins wrapper around ApiClient.grid: rapid successive calls may
 * resolve out of order on the network, so stale responses are dropped and
 * their promises resolve to null.
 */
export class GridRequester {
  private latest = 0;

  constructor(private readonly api: ApiClient) {}

  async request(calibration: Calibration): Promise<GridResponse | null> {
    const ticket = ++this.latest;
    const response = await this.api.grid(calibration);
    return ticket === this.latest ? response : null;
  }
}
