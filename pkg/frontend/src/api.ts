// Typed client for the projection service. The raw response text is kept
// alongside the parsed payload so callers can compare responses
// byte-for-byte (the server is the single source of numerical truth).

export interface ProjectionPoint {
  z1: number;
  z2: number;
  label: string;
  uncertainty: number;
}

export interface ProjectionPayload {
  schema: string;
  lambda: number;
  d: number;
  eigenvalues: number[];
  loc_part: number[];
  disp_part: number[];
  beta: number[][];
  center: number[];
  points: ProjectionPoint[];
}

export interface BoundaryPayload {
  schema: string;
  lambda: number;
  grid: number;
  x0: number;
  x1: number;
  y0: number;
  y1: number;
  labels: string[][];
  uncertainty: number[][];
  segments: [number[], number[]][];
}

export interface LrPayload {
  schema: string;
  grid: number[];
  lr_values: number[];
  argmax_lambda: number;
}

export interface SessionInfo {
  schema: string;
  session_id: string;
  status: string;
  n?: number;
  p?: number;
  d?: number;
  classes?: string[];
  family?: string;
}

export interface FetchedProjection {
  payload: ProjectionPayload;
  rawText: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly category: string,
              message: string) {
    super(message);
  }
}

async function bodyOrThrow(resp: Response): Promise<string> {
  const text = await resp.text();
  if (!resp.ok) {
    let category = "error";
    let message = text;
    try {
      const parsed = JSON.parse(text);
      category = parsed.category ?? "error";
      message = parsed.error ?? text;
    } catch {
      // non-JSON error body: keep raw text
    }
    throw new ApiError(resp.status, category, message);
  }
  return text;
}

export class Api {
  constructor(readonly base: string,
              readonly fetchFn: typeof fetch = fetch) {}

  projectionUrl(sessionId: string, lambda: number): string {
    return `${this.base}/sessions/${encodeURIComponent(sessionId)}` +
      `/projection?lambda=${lambda}`;
  }

  async getProjection(sessionId: string,
                      lambda: number): Promise<FetchedProjection> {
    const resp = await this.fetchFn(this.projectionUrl(sessionId, lambda));
    const rawText = await bodyOrThrow(resp);
    return { payload: JSON.parse(rawText) as ProjectionPayload, rawText };
  }

  async getBoundary(sessionId: string, lambda: number,
                    grid = 64): Promise<BoundaryPayload> {
    const resp = await this.fetchFn(
      `${this.base}/sessions/${encodeURIComponent(sessionId)}` +
      `/boundary?lambda=${lambda}&grid=${grid}`);
    return JSON.parse(await bodyOrThrow(resp)) as BoundaryPayload;
  }

  async getLrTrace(sessionId: string, steps = 21): Promise<LrPayload> {
    const resp = await this.fetchFn(
      `${this.base}/sessions/${encodeURIComponent(sessionId)}` +
      `/lr?steps=${steps}`);
    return JSON.parse(await bodyOrThrow(resp)) as LrPayload;
  }

  async getSessionInfo(sessionId: string): Promise<SessionInfo> {
    const resp = await this.fetchFn(
      `${this.base}/sessions/${encodeURIComponent(sessionId)}`);
    return JSON.parse(await bodyOrThrow(resp)) as SessionInfo;
  }

  async createSession(file: Blob, filename: string,
                      config: object): Promise<SessionInfo> {
    const form = new FormData();
    form.append("file", file, filename);
    form.append("config", JSON.stringify(config));
    const resp = await this.fetchFn(`${this.base}/sessions`,
                                    { method: "POST", body: form });
    return JSON.parse(await bodyOrThrow(resp)) as SessionInfo;
  }
}
