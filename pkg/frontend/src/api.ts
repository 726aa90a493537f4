// Typed client for the retweetguard scoring service. Mirrors the server's
// JSON contract verbatim; no other endpoints exist.

export interface ScoredItem {
  user_id: string;
  label?: string;
  confidence?: number;
  error?: string;
}

export interface ScoreResponse {
  results: ScoredItem[];
  model_version: number;
}

export interface FeedbackResponse {
  status: string; // "Accepted" | "IgnoredHighConfidence" | "RejectedUnknownUser"
  buffer_size: number;
  retrained: boolean;
  model_version: number;
}

export interface ModelInfo {
  version: number;
  spec: {
    kind: string;
    class_mode: string;
    random_seed: number;
    hyperparameters: Record<string, unknown>;
  };
  trained_at: string;
  threshold: number;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx reply from a reachable service; `detail` is the server's message. */
export class ServiceError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ServiceError";
  }
}

export interface ScoreInput {
  retweeterIds?: string[];
  tweetRef?: string;
  classMode?: string;
}

export class ServiceClient {
  readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    // bind so a bare global fetch keeps its expected receiver
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  async score(input: ScoreInput): Promise<ScoreResponse> {
    const body: Record<string, unknown> = {};
    if (input.retweeterIds !== undefined) body.retweeter_ids = input.retweeterIds;
    if (input.tweetRef !== undefined) body.tweet_ref = input.tweetRef;
    if (input.classMode !== undefined) body.class_mode = input.classMode;
    return this.post<ScoreResponse>("/score", body);
  }

  async sendFeedback(
    userId: string,
    predictedLabel: string,
    correctedLabel?: string,
  ): Promise<FeedbackResponse> {
    const body: Record<string, unknown> = {
      user_id: userId,
      predicted_label: predictedLabel,
    };
    if (correctedLabel !== undefined) body.corrected_label = correctedLabel;
    return this.post<FeedbackResponse>("/feedback", body);
  }

  async model(): Promise<ModelInfo> {
    return this.get<ModelInfo>("/model");
  }

  async health(): Promise<{ status: string }> {
    return this.get<{ status: string }>("/health");
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.unwrap<T>(res);
  }

  private async get<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path);
    return this.unwrap<T>(res);
  }

  private async unwrap<T>(res: Response): Promise<T> {
    if (!res.ok) {
      let detail = `HTTP ${res.status}`;
      try {
        const obj = await res.json();
        if (obj && typeof obj.detail === "string") detail = obj.detail;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ServiceError(res.status, detail);
    }
    return (await res.json()) as T;
  }
}
