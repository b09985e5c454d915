/** Typed client for the qconstrain service.
 *
 * Responses are kept as raw text alongside the parsed value so callers can
 * verify byte-level identity with exported fixtures; the client itself never
 * rewrites or recomputes anything the backend sent.
 */

import {
  ApiErrorBody,
  FieldGrid,
  FieldRequest,
  ModelsResponse,
  SCHEMA_VERSION,
  TrajectoryRequest,
  TrajectoryResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface ApiResult<T> {
  value: T;
  rawText: string;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<ApiResult<T>> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, "NetworkError", String(err));
    }
    const rawText = await response.text();
    let parsed: unknown;
    try {
      parsed = JSON.parse(rawText);
    } catch {
      throw new ApiError(response.status, "BadPayload", "response is not JSON");
    }
    if (!response.ok) {
      const body = parsed as ApiErrorBody;
      throw new ApiError(response.status, body.code ?? "Unknown", body.message ?? rawText);
    }
    const value = parsed as T & { schema_version?: number };
    if (value.schema_version !== undefined && value.schema_version !== SCHEMA_VERSION) {
      throw new ApiError(response.status, "SchemaMismatch",
        `expected schema_version ${SCHEMA_VERSION}, got ${value.schema_version}`);
    }
    return { value: value as T, rawText };
  }

  getModels(): Promise<ApiResult<ModelsResponse>> {
    return this.request<ModelsResponse>("/models");
  }

  postField(body: FieldRequest): Promise<ApiResult<FieldGrid>> {
    return this.request<FieldGrid>("/field", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  postTrajectory(body: TrajectoryRequest): Promise<ApiResult<TrajectoryResponse>> {
    return this.request<TrajectoryResponse>("/trajectory", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
