/** Thin typed client for the session service HTTP endpoints. */

import { SubgraphPayload } from "./scene";

export class ApiError extends Error {
  constructor(public code: string, message: string) {
    super(message);
  }
}

export interface DatasetInfo {
  dataset_id: string;
  node_count: number;
  edge_count: number;
  features: string[];
}

export interface SearchHit {
  id: number;
  label: string;
  external_id: string;
  degree: number;
}

export interface SessionInfo {
  session_id: string;
  dataset_id: string;
  status: string;
  frame_no: number;
  frame_rate: number;
  iters_per_frame: number;
  node_count: number;
  edge_count: number;
  subgraph: SubgraphPayload;
  layout: { k: number; area: [number, number]; pinned: number[] };
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(path, init);
  const body = await res.json().catch(() => null);
  if (!res.ok) {
    throw new ApiError(body?.code ?? "http_error", body?.message ?? res.statusText);
  }
  return body as T;
}

export function listDatasets(): Promise<DatasetInfo[]> {
  return request("/datasets");
}

export function searchLabels(
  datasetId: string, q: string, limit = 20,
): Promise<{ results: SearchHit[] }> {
  const qs = new URLSearchParams({ q, limit: String(limit) });
  return request(`/datasets/${encodeURIComponent(datasetId)}/search?${qs}`);
}

export type Selection =
  | { external_ids: string[] }
  | { top_k: { feature: string; k: number } }
  | { expand: { seeds: number[]; hops: number; cap: number } };

export function createSession(
  datasetId: string,
  selection: Selection,
  opts: { seed?: number; area?: [number, number] } = {},
): Promise<SessionInfo> {
  return request("/sessions", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ dataset_id: datasetId, selection, ...opts }),
  });
}

export function deleteSession(sessionId: string): Promise<unknown> {
  return request(`/sessions/${encodeURIComponent(sessionId)}`, { method: "DELETE" });
}

export function streamUrl(sessionId: string): string {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  return `${proto}//${location.host}/sessions/${encodeURIComponent(sessionId)}/stream`;
}
