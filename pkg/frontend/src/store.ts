/**
 * Session state machine.
 * Holds exactly what the service said — every number in the view is verbatim
 * from a response payload.  The store enforces the word-minimum gate (an
 * under-length answer never leaves the browser) and permits one in-flight
 * request at a time.
 */

import { ApiClient, ApiError } from "./client.js";
import { tokenize } from "./tokenize.js";
import type {
  Estimates,
  Question,
  Scoring,
  TrajectoryPoint,
} from "./types.js";

export type Phase = "idle" | "starting" | "asking" | "submitting" | "done";

export interface ErrorBanner {
  code: string;
  message: string;
  retryable: boolean;
}

export interface SessionView {
  phase: Phase;
  sessionId: string | null;
  strategy: string | null;
  scoring: Scoring;
  question: Question | null;
  step: number;
  trajectory: TrajectoryPoint[];
  estimates: Estimates;
  done: boolean;
  error: ErrorBanner | null;
}

export type Listener = (view: SessionView) => void;

const INITIAL: SessionView = {
  phase: "idle",
  sessionId: null,
  strategy: null,
  scoring: "both",
  question: null,
  step: 0,
  trajectory: [],
  estimates: {},
  done: false,
  error: null,
};

function toBanner(err: unknown, retryable: boolean): ErrorBanner {
  if (err instanceof ApiError) {
    return {
      code: err.code,
      message: err.message,
      retryable: retryable || err.status === 0 || err.status >= 500,
    };
  }
  return { code: "unknown", message: String(err), retryable };
}

export class SessionStore {
  private view: SessionView = { ...INITIAL };
  private listeners: Listener[] = [];
  private inflight = false;

  constructor(private readonly client: ApiClient) {}

  getView(): SessionView {
    return this.view;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((other) => other !== fn);
    };
  }

  /** How many words the current answer still needs before it may be sent. */
  wordsMissing(text: string): number {
    const needed = this.view.question?.min_words ?? 0;
    return Math.max(0, needed - tokenize(text).length);
  }

  async start(
    strategy: string,
    scoring: Scoring = "both",
    maxItems?: number,
  ): Promise<void> {
    if (this.inflight) return;
    this.inflight = true;
    this.patch({ ...INITIAL, phase: "starting", strategy, scoring });
    try {
      const res = await this.client.createSession({
        strategy,
        scoring,
        ...(maxItems === undefined ? {} : { max_items: maxItems }),
      });
      this.patch({
        phase: "asking",
        sessionId: res.session_id,
        question: res.question,
      });
    } catch (err) {
      this.patch({ phase: "idle", error: toBanner(err, true) });
    } finally {
      this.inflight = false;
    }
  }

  async submit(text: string): Promise<void> {
    const { question, sessionId, done } = this.view;
    if (this.inflight || done || question === null || sessionId === null) return;
    const words = tokenize(text);
    if (words.length < question.min_words) {
      this.patch({
        error: {
          code: "too_few_words",
          message:
            `Please answer with at least ${question.min_words} words ` +
            `(${words.length} so far).`,
          retryable: false,
        },
      });
      return;
    }
    this.inflight = true;
    this.patch({ phase: "submitting", error: null });
    try {
      const res = await this.client.submitWords(sessionId, question.item_id, words);
      const point: TrajectoryPoint = {
        step: res.step,
        item_id: question.item_id,
        ...res.estimates,
      };
      this.patch({
        phase: res.done ? "done" : "asking",
        step: res.step,
        estimates: res.estimates,
        trajectory: [...this.view.trajectory, point],
        question: res.question,
        done: res.done,
      });
    } catch (err) {
      // a rejected answer (e.g. unknown words) leaves the question pending
      this.patch({ phase: "asking", error: toBanner(err, false) });
    } finally {
      this.inflight = false;
    }
  }

  /** Rebuild the view from the service snapshot, e.g. after a page refresh. */
  async restore(sessionId: string): Promise<void> {
    if (this.inflight) return;
    this.inflight = true;
    this.patch({ ...INITIAL, phase: "starting" });
    try {
      const snap = await this.client.getSession(sessionId);
      this.patch({
        phase: snap.done ? "done" : "asking",
        sessionId: snap.session_id,
        strategy: snap.strategy,
        scoring: snap.scoring,
        question: snap.question,
        step: snap.step,
        trajectory: snap.trajectory,
        estimates: snap.estimates,
        done: snap.done,
      });
    } catch (err) {
      this.patch({ phase: "idle", error: toBanner(err, true) });
    } finally {
      this.inflight = false;
    }
  }

  private patch(changes: Partial<SessionView>): void {
    this.view = { ...this.view, ...changes };
    for (const fn of this.listeners) fn(this.view);
  }
}
