/**
 * Typed client for the chat service HTTP API.
 *
 * The fetch implementation is injectable so tests can run without a
 * server. All text is shipped verbatim — the client does no normalization
 * or tokenization of its own.
 */

export interface ChatRequest {
  message: string;
  session_id: string;
  backend?: string;
}

export interface ChatResponse {
  reply: string;
  source: "rule" | "retrieval" | "generative";
  verdict: "greeting" | "out_of_scope" | "answered";
  confidence: number | null;
  session_id: string;
}

export interface HealthResponse {
  status: string;
  model_kind: string;
}

export interface InfoResponse {
  backends: string[];
  default_backend: string;
  models: Record<string, { seed: number; vocab_size: number; stemming: boolean }>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ChatApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async chat(request: ChatRequest): Promise<ChatResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/chat`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) {
      const detail = await response
        .json()
        .then((body) => (body as { error?: string }).error ?? response.statusText)
        .catch(() => response.statusText);
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as ChatResponse;
  }

  async health(): Promise<HealthResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/health`);
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return (await response.json()) as HealthResponse;
  }

  async info(): Promise<InfoResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/info`);
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return (await response.json()) as InfoResponse;
  }
}
