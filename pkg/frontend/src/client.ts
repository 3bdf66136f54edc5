import { BindingError, FlatCloud, toRows, validateCloud } from "./flatcloud.js";

export class ServiceError extends Error {
  constructor(
    message: string,
    public readonly kind: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

interface SampleResponse {
  indices: number[];
  context_indices: number[] | null;
  n_points: number;
}

interface EvalResponse {
  foreground_rate: number;
  point_recall: number | null;
  n_boxes: number;
  boxes_hit: number;
}

/**
 * Thin client for the sampling service. Sampler calls delegate entirely to
 * the core implementation; index sequences come back exactly as the core
 * computes them.
 */
export class SamplerClient {
  constructor(private readonly baseUrl: string) {}

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    const body = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      const kind = typeof body.kind === "string" ? body.kind : "usage";
      const detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body);
      throw new ServiceError(detail, kind, response.status);
    }
    return body as T;
  }

  async health(): Promise<boolean> {
    const response = await fetch(`${this.baseUrl}/health`);
    return response.ok;
  }

  /** Score-weighted farthest point sampling over caller buffers. */
  async sFps(cloud: FlatCloud, m: number, gamma: number): Promise<number[]> {
    validateCloud(cloud);
    if (cloud.scores === undefined) {
      throw new BindingError("sFps needs a scores buffer");
    }
    const body = await this.post<SampleResponse>("/sample", {
      coords: toRows(cloud.coords, cloud.n, 3),
      scores: Array.from(cloud.scores),
      method: "sfps",
      m,
      gamma,
    });
    return body.indices;
  }

  /** Plain farthest point sampling from an explicit start index. */
  async fps(cloud: FlatCloud, m: number, startIndex = 0): Promise<number[]> {
    validateCloud(cloud);
    const body = await this.post<SampleResponse>("/sample", {
      coords: toRows(cloud.coords, cloud.n, 3),
      method: "fps",
      m,
      start_index: startIndex,
    });
    return body.indices;
  }

  /** Metrics for saved indices against a scene file on the service host. */
  async evaluate(scenePath: string, indices: number[]): Promise<EvalResponse> {
    return this.post<EvalResponse>("/eval", { scene_path: scenePath, indices });
  }
}
