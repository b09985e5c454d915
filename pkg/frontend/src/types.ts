/** Wire types for the qconstrain HTTP API, schema_version 1. */

export const SCHEMA_VERSION = 1;

export interface ModelInfo {
  id: string;
  description: string;
  kind: string;
  coord_names: string[];
  coord_dim: number;
  params: Record<string, number>;
  engines: string[];
  default_engine: string;
  needs_partner: boolean;
}

export interface ModelsResponse {
  schema_version: number;
  models: ModelInfo[];
}

export interface SphereCoords {
  theta: number;
  phi: number;
}

export interface FieldRequest {
  model: string;
  params?: Record<string, number>;
  grid?: { theta_count: number; phi_count: number };
  partner?: SphereCoords;
  engine?: string;
}

export interface FieldSample {
  theta: number;
  phi: number;
  theta_dot: number;
  phi_dot: number;
}

export interface FieldGrid {
  schema_version: number;
  model: string;
  params: Record<string, number>;
  engine: string;
  partner: SphereCoords | null;
  grid: {
    theta_count: number;
    phi_count: number;
    theta_min: number;
    theta_max: number;
    phi_min: number;
    phi_max: number;
    phi_endpoint: boolean;
    ordering: string;
  };
  samples: FieldSample[];
  singular_mask: [number, number][];
}

export interface TrajectoryRequest {
  model: string;
  engine?: string;
  params?: Record<string, number>;
  initial: number[];
  t_end?: number;
  rel_tol?: number;
}

export interface TrajectoryResponse {
  schema_version: number;
  model: string;
  engine: string;
  params: Record<string, number>;
  coord_names: string[];
  times: number[];
  points: number[][];
  diagnostics: Record<string, number[]>;
  metadata: {
    integrator: Record<string, unknown>;
    drift: Record<string, number>;
    partial: boolean;
    failure: string | null;
  };
}

export interface ApiErrorBody {
  schema_version: number;
  code: string;
  message: string;
}
