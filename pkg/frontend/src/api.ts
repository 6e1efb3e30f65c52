// Typed client for the studio service.  The fetch implementation is
// injectable so tests can run against a stub replaying recorded responses.

import type {
  ComposeOut,
  DetectOut,
  EnginesOut,
  MappedOut,
  PanelInfo,
  RegionOut,
  SessionCreated,
  StatusOut,
} from './types';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly retryable: boolean,
    readonly httpStatus: number,
  ) {
    super(`${code}: ${message}`);
  }
}

export interface ManualRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export class StudioApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  private async checked(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.url(path), init);
    if (!response.ok) {
      let code = 'UnknownError';
      let message = `HTTP ${response.status}`;
      let retryable = false;
      try {
        const body = await response.json();
        code = body.code ?? code;
        message = body.message ?? message;
        retryable = Boolean(body.retryable);
      } catch {
        // non-JSON error body; keep defaults
      }
      throw new ServiceError(code, message, retryable, response.status);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.checked(path, init);
    return (await response.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.json<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  createPanel(png: Uint8Array<ArrayBuffer>): Promise<PanelInfo> {
    return this.json<PanelInfo>('/panels', {
      method: 'POST',
      headers: { 'content-type': 'image/png' },
      body: png,
    });
  }

  panelImageUrl(panelId: string): string {
    return this.url(`/panels/${panelId}/image`);
  }

  detect(panelId: string, detector: string, padFrac?: number): Promise<DetectOut> {
    const payload: Record<string, unknown> = { detector };
    if (padFrac !== undefined) payload.pad_frac = padFrac;
    return this.post<DetectOut>(`/panels/${panelId}/detect`, payload);
  }

  manualRegion(panelId: string, rect: ManualRect): Promise<RegionOut> {
    return this.post<RegionOut>(`/panels/${panelId}/regions`, { rect });
  }

  listRegions(panelId: string): Promise<{ regions: RegionOut[] }> {
    return this.json(`/panels/${panelId}/regions`);
  }

  engines(): Promise<EnginesOut> {
    return this.json('/engines');
  }

  createSession(options: {
    panel_id: string;
    face_index: number;
    engine: string;
    mode?: string;
    frames_dir?: string;
    frames_b64?: string[];
    keep_every?: number;
  }): Promise<SessionCreated> {
    return this.post<SessionCreated>('/sessions', options);
  }

  requestFrames(sessionId: string, indices: number[]): Promise<{ accepted: number[] }> {
    return this.post(`/sessions/${sessionId}/frames`, { indices });
  }

  getStatus(sessionId: string): Promise<StatusOut> {
    return this.json(`/sessions/${sessionId}`);
  }

  frameUrl(sessionId: string, index: number): string {
    return this.url(`/sessions/${sessionId}/frames/${index}`);
  }

  async getFrame(sessionId: string, index: number): Promise<Uint8Array> {
    const response = await this.checked(`/sessions/${sessionId}/frames/${index}`);
    return new Uint8Array(await response.arrayBuffer());
  }

  setParams(sessionId: string, eye: number | null, lip: number | null, mode?: string): Promise<StatusOut> {
    return this.post<StatusOut>(`/sessions/${sessionId}/params`, { eye, lip, mode: mode ?? null });
  }

  selectKeyframe(sessionId: string, index: number): Promise<StatusOut> {
    return this.post<StatusOut>(`/sessions/${sessionId}/select`, { index });
  }

  commit(sessionId: string): Promise<MappedOut> {
    return this.json(`/sessions/${sessionId}/commit`, { method: 'POST' });
  }

  compose(panelId: string, mappedIds: string[], featherWidth = 0): Promise<ComposeOut> {
    return this.post<ComposeOut>(`/panels/${panelId}/compose`, {
      mapped_ids: mappedIds,
      feather_width: featherWidth,
    });
  }

  async exportItem(itemId: string): Promise<Uint8Array> {
    const response = await this.checked(`/export/${itemId}`);
    return new Uint8Array(await response.arrayBuffer());
  }

  exportUrl(itemId: string): string {
    return this.url(`/export/${itemId}`);
  }
}
