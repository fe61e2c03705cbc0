import type {
  ExportResponse,
  FeatureClass,
  PredictRequest,
  PredictResponse,
  RlePayload,
  SessionInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client for the annotation service; no mask math here. */
export class AnnotationClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  private post(path: string, body: unknown): Promise<Response> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async listItems(): Promise<string[]> {
    const body = await this.json<{ items: string[] }>("/items");
    return body.items;
  }

  async createSession(body: { item_id?: string; image_b64?: string }): Promise<SessionInfo> {
    const response = await this.post("/sessions", body);
    return (await response.json()) as SessionInfo;
  }

  async sessionImage(sessionId: string): Promise<Uint8Array> {
    const response = await this.request(`/sessions/${sessionId}/image`);
    return new Uint8Array(await response.arrayBuffer());
  }

  async predict(sessionId: string, request: PredictRequest): Promise<PredictResponse> {
    const response = await this.post(`/sessions/${sessionId}/predict`, request);
    return (await response.json()) as PredictResponse;
  }

  async commit(
    sessionId: string,
    cls: FeatureClass,
    mask: RlePayload,
    prompts: PredictRequest | null,
  ): Promise<void> {
    await this.post(`/sessions/${sessionId}/commit`, { class: cls, mask, prompts });
  }

  async undo(sessionId: string): Promise<void> {
    await this.post(`/sessions/${sessionId}/undo`, {});
  }

  async exportLabels(sessionId: string): Promise<ExportResponse> {
    return this.json<ExportResponse>(`/sessions/${sessionId}/export`);
  }
}

/** Base64 to bytes without Node Buffer, so it runs in any browser. */
export function base64ToBytes(b64: string): Uint8Array {
  const binary = atob(b64);
  const out = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) out[i] = binary.charCodeAt(i);
  return out;
}
