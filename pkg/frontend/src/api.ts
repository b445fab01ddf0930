/** Typed client for the heliocast forecasting service. */

export interface ModelInfo {
  model_id: string;
  kind: string;
  display_name?: string;
  trained_at: string | null;
  metrics: Record<string, unknown> | null;
}

export interface ForecastPoint {
  timestamp: string;
  temperature_k: number;
  predicted_wm2: number;
}

export interface MetricsCells {
  mse: number;
  rmse: number;
  mae: number;
  r2: number | null;
  n: number;
}

export interface EvaluationRow {
  display_name: string;
  kind: string;
  failed: boolean;
  error: string | null;
  note: string | null;
  metrics: MetricsCells | null;
}

export interface EvaluationReport {
  split_description: string;
  seed: number;
  dataset_fingerprint: string;
  footnotes: string[];
  rows: EvaluationRow[];
}

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly code: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    public readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async get<T>(path: string, signal?: AbortSignal): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, { signal });
    if (!response.ok) {
      let code = "http_error";
      let message = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { code?: string; message?: string };
        if (body.code) code = body.code;
        if (body.message) message = body.message;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(message, response.status, code);
    }
    return (await response.json()) as T;
  }

  health(signal?: AbortSignal): Promise<{ status: string }> {
    return this.get("/health", signal);
  }

  models(signal?: AbortSignal): Promise<ModelInfo[]> {
    return this.get("/models", signal);
  }

  forecast(
    modelId: string,
    hours: number,
    clamp: boolean,
    signal?: AbortSignal,
  ): Promise<ForecastPoint[]> {
    const params = new URLSearchParams({
      model: modelId,
      hours: String(hours),
      clamp: clamp ? "true" : "false",
    });
    return this.get(`/forecast?${params.toString()}`, signal);
  }

  evaluation(signal?: AbortSignal): Promise<EvaluationReport> {
    return this.get("/evaluation", signal);
  }
}
