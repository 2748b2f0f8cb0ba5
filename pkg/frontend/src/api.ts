/** Thin typed client for the gazekit service routes.  No math happens here:
 * the browser only builds URLs, fetches, filters, and displays. */

export interface FixationDto {
  cx: number;
  cy: number;
  onset_ms: number;
  duration_ms: number;
  n: number;
}

export interface FixationsResponse {
  count: number;
  fixations: FixationDto[];
}

export interface ClusterModelDto {
  method: string;
  k: number;
  means: [number, number][];
  labels: number[];
  covariances: number[][][] | null;
  xb: number | null;
  xb_membership: string | null;
}

export interface SweepEntryDto {
  k: number;
  xb: number | null;
  score: number | null;
  error: string | null;
}

export interface JobDto {
  id: string;
  recording_id: string;
  kind: string;
  status: "queued" | "running" | "done" | "failed";
  result: any;
  error: { code: string; message: string } | null;
}

export interface ServiceError {
  code: string;
  message: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: ServiceError) {
    super(`${detail.code}: ${detail.message}`);
  }
}

export interface LayerQuery {
  window?: [number, number];
  low?: string;
  high?: string;
  sigma?: number;
  opacity?: number;
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail: ServiceError;
    try {
      detail = (await resp.json()) as ServiceError;
    } catch {
      detail = { code: `HTTP${resp.status}`, message: resp.statusText };
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class GazekitClient {
  constructor(readonly base: string = "") {}

  layerUrl(recording: string, kind: "heatmap" | "gazeplot" | "scatter", q: LayerQuery = {}): string {
    const params = new URLSearchParams();
    if (q.window) params.set("window", `${q.window[0]},${q.window[1]}`);
    if (q.low) params.set("low", q.low);
    if (q.high) params.set("high", q.high);
    if (q.sigma !== undefined) params.set("sigma", String(q.sigma));
    if (q.opacity !== undefined) params.set("opacity", String(q.opacity));
    const suffix = params.toString();
    return `${this.base}/recordings/${recording}/layers/${kind}${suffix ? "?" + suffix : ""}`;
  }

  async recordings(): Promise<string[]> {
    const doc = await asJson<{ recordings: string[] }>(await fetch(`${this.base}/recordings`));
    return doc.recordings;
  }

  async upload(log: string, screen: { width: number; height: number }, meta?: unknown): Promise<string> {
    const body: Record<string, unknown> = { log, screen };
    if (meta !== undefined) body.meta = meta;
    const resp = await fetch(`${this.base}/recordings`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await asJson<{ id: string }>(resp)).id;
  }

  async fixations(recording: string): Promise<FixationsResponse> {
    return asJson(await fetch(`${this.base}/recordings/${recording}/fixations`));
  }

  async analyze(recording: string, kind: string, params: Record<string, unknown>): Promise<JobDto> {
    const resp = await fetch(`${this.base}/recordings/${recording}/analyses`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ kind, params }),
    });
    return asJson<JobDto>(resp);
  }

  async fetchText(url: string): Promise<string> {
    const resp = await fetch(url);
    if (!resp.ok) throw new ApiError(resp.status, await resp.json());
    return resp.text();
  }

  async fetchBytes(url: string): Promise<Uint8Array> {
    const resp = await fetch(url);
    if (!resp.ok) throw new ApiError(resp.status, await resp.json());
    return new Uint8Array(await resp.arrayBuffer());
  }
}

/** Client-side onset filter mirroring the server's brush contract (inclusive). */
export function filterByOnset(fixations: FixationDto[], window: [number, number] | null): FixationDto[] {
  if (!window) return fixations;
  return fixations.filter((f) => window[0] <= f.onset_ms && f.onset_ms <= window[1]);
}
