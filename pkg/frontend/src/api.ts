/** Typed client for the live-session HTTP API. No client-side recomputation:
 * every number displayed comes straight from these payloads. */

export type FeedbackKind = "like" | "override" | "neutral" | "skipped";

export interface SessionInfo {
  session_id: string;
  episode: number;
  pool_size: number;
  pending: boolean;
  config_hash: string;
}

export interface Recommendation {
  session_id: string;
  episode: number;
  scenario_id: string;
  features: number[];
  score: number;
  threshold: number;
  threshold_justification: string;
  spe_summary: string;
  matched_rules: string[];
  explanation_trace: string[];
}

export interface FeedbackSnapshot {
  episode: number;
  scenario_id: string;
  kind: FeedbackKind;
  loss: number;
  score_before: number;
  score_after: number;
  smoothed_reward: number;
  fidelity: number;
  retrain_fired: boolean;
  arm_posteriors: number[];
  arm_counts: Record<string, [number, number]>;
}

export interface EpisodePoint {
  episode: number;
  loss: number;
  smoothed_reward: number;
  threshold: number;
  fidelity: number;
  kind: FeedbackKind;
  retrain_fired: boolean;
  acted: boolean;
}

export interface MetricsPage {
  from: number;
  episodes: EpisodePoint[];
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, detail?: string) {
    super(detail ? `${code}: ${detail}` : code);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(base + path, init);
  const body = await resp.json();
  if (!resp.ok) {
    throw new ApiError(resp.status, body.error ?? "UnknownError", body.detail);
  }
  return body as T;
}

export function metricsPath(fromEpisode: number): string {
  return `/api/metrics?from=${fromEpisode}`;
}

export class Client {
  constructor(private base: string = "") {}

  session(): Promise<SessionInfo> {
    return request<SessionInfo>(this.base, "/api/session");
  }

  next(): Promise<Recommendation> {
    return request<Recommendation>(this.base, "/api/next");
  }

  feedback(kind: FeedbackKind): Promise<FeedbackSnapshot> {
    return request<FeedbackSnapshot>(this.base, "/api/feedback", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ kind }),
    });
  }

  metrics(fromEpisode: number): Promise<MetricsPage> {
    return request<MetricsPage>(this.base, metricsPath(fromEpisode));
  }

  reset(): Promise<{ ok: boolean; session_id: string }> {
    return request(this.base, "/api/reset", { method: "POST", body: "{}" });
  }
}
