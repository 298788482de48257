/** Thin typed client for the session API.
 *
 * `fetch` is injected so tests can run against a scripted transport.
 * Server-side failures surface as ApiError with the service's own
 * `detail` message, which the UI shows verbatim (the STL parser's
 * messages are written for humans).
 */

import type {
  EventDto,
  FrameResponseDto,
  MeshWithReportDto,
  ModelUploadDto,
  SessionCreatedDto,
  SessionStateDto,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

export interface SessionOptions {
  marker_side: number;
  fx: number;
  fy: number;
  cx?: number;
  cy?: number;
  scale_mode?: "fit_to_target" | "true_size";
  target_extent?: number;
  include_demo_catalog?: boolean;
}

async function parseError(resp: Response): Promise<never> {
  let detail = `${resp.status} ${resp.statusText}`;
  try {
    const body = await resp.json();
    if (typeof body?.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(resp.status, detail);
}

export class ApiClient {
  constructor(
    private readonly base = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async json<T>(url: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + url, init);
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as T;
  }

  createSession(options: SessionOptions): Promise<SessionCreatedDto> {
    return this.json("/api/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(options),
    });
  }

  getState(sessionId: string): Promise<SessionStateDto> {
    return this.json(`/api/sessions/${sessionId}`);
  }

  sendEvent(sessionId: string, event: EventDto): Promise<SessionStateDto> {
    return this.json(`/api/sessions/${sessionId}/events`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(event),
    });
  }

  uploadModel(sessionId: string, name: string, stl: ArrayBuffer | Uint8Array): Promise<ModelUploadDto> {
    const body = stl instanceof Uint8Array
      ? stl.slice().buffer as ArrayBuffer
      : stl;
    return this.json(
      `/api/sessions/${sessionId}/model?name=${encodeURIComponent(name)}`,
      {
        method: "POST",
        headers: { "content-type": "application/octet-stream" },
        body,
      },
    );
  }

  postFrame(sessionId: string, gray: Uint8Array, width: number, height: number): Promise<FrameResponseDto> {
    return this.json(
      `/api/sessions/${sessionId}/frames?width=${width}&height=${height}`,
      {
        method: "POST",
        headers: { "content-type": "application/octet-stream" },
        body: gray.slice().buffer as ArrayBuffer,
      },
    );
  }

  getMesh(sessionId: string): Promise<MeshWithReportDto> {
    return this.json(`/api/sessions/${sessionId}/mesh`);
  }

  getScript(sessionId: string): Promise<EventDto[]> {
    return this.json(`/api/sessions/${sessionId}/script`);
  }

  markerUrl(size = 256): string {
    return `${this.base}/api/marker.pgm?size=${size}`;
  }
}
