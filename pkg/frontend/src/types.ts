/**
 * Payload contracts for the assessment service HTTP API.
 * Field names match the service's json exactly — this client never renames
 * or recomputes anything it receives.
 */

export type Scoring = "latent" | "ctt" | "both";

export type ScoreExposure = "trajectory" | "final_only";

export interface Question {
  item_id: number;
  text: string;
  min_words: number;
}

/** Which estimates appear depends on the session's scoring choice. */
export interface Estimates {
  theta?: number;
  yhat?: number;
}

export interface CreateSessionRequest {
  strategy: string;
  scoring?: Scoring;
  max_items?: number;
}

export interface CreateSessionResponse {
  session_id: string;
  question: Question;
}

export interface SubmitResponseRequest {
  item_id: number;
  words: string[];
}

export interface SubmitResponseResponse {
  step: number;
  estimates: Estimates;
  question: Question | null;
  done: boolean;
}

export interface TrajectoryPoint {
  step: number;
  item_id?: number;
  theta?: number;
  posterior_sd?: number;
  yhat?: number;
}

export interface SessionSnapshot {
  session_id: string;
  strategy: string;
  scoring: Scoring;
  max_items: number;
  step: number;
  done: boolean;
  estimates: Estimates;
  trajectory: TrajectoryPoint[];
  question: Question | null;
}

export interface BundleInfo {
  measure: string | null;
  K: number;
  J: number;
  seed: number;
  strategies: string[];
  scorings: Scoring[];
  max_items_default: number;
  score_exposure: ScoreExposure;
  theta0: number | string;
}

export interface HealthResponse {
  status: string;
  bundle: BundleInfo;
  active_sessions: number;
}

export interface ItemInfo {
  item_id: number;
  text: string;
  shorthand: string;
  min_words: number;
}

export interface ItemsResponse {
  items: ItemInfo[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
