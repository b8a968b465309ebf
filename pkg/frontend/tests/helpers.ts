/**
 * Test doubles and fixture loading.
 *
 * The fixture file was recorded against a live service instance
 * (tools/record_ui_fixtures.py in the repository root regenerates it), so
 * every test replays genuine payloads rather than hand-written ones.
 */

import { readFileSync } from "node:fs";
import type { FetchLike } from "../src/client.js";
import type {
  CreateSessionRequest,
  CreateSessionResponse,
  HealthResponse,
  ItemsResponse,
  SessionSnapshot,
  SubmitResponseRequest,
  SubmitResponseResponse,
} from "../src/types.js";

export interface Exchange<Req, Res> {
  request: Req;
  status: number;
  body: Res;
}

export interface SessionFixture {
  session_id: string;
  create: Exchange<CreateSessionRequest, CreateSessionResponse>;
  oov: Exchange<SubmitResponseRequest, { code: string; message: string }>;
  steps: Array<Exchange<SubmitResponseRequest, SubmitResponseResponse>>;
  snapshots: { after_step_2: SessionSnapshot; done: SessionSnapshot };
  health: HealthResponse;
  items: ItemsResponse;
}

export function loadFixture(): SessionFixture {
  const raw = readFileSync(
    new URL("./fixtures/session.json", import.meta.url),
    "utf8",
  );
  return JSON.parse(raw) as SessionFixture;
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

type Planned =
  | { kind: "json"; status: number; body: unknown }
  | { kind: "raw"; response: Response }
  | { kind: "reject"; error: Error }
  | { kind: "pending"; promise: Promise<Response> };

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** Scripted stand-in for fetch: responses are consumed in plan order. */
export class FakeFetch {
  readonly calls: RecordedCall[] = [];
  private plan: Planned[] = [];

  readonly fetch: FetchLike = (url, init) => {
    this.calls.push({
      url,
      method: init?.method ?? "GET",
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
    });
    const next = this.plan.shift();
    if (next === undefined) {
      return Promise.reject(
        new Error(`unplanned request: ${init?.method ?? "GET"} ${url}`),
      );
    }
    switch (next.kind) {
      case "reject":
        return Promise.reject(next.error);
      case "raw":
        return Promise.resolve(next.response);
      case "pending":
        return next.promise;
      case "json":
        return Promise.resolve(jsonResponse(next.status, next.body));
    }
  };

  expectJson(status: number, body: unknown): void {
    this.plan.push({ kind: "json", status, body });
  }

  expectRaw(response: Response): void {
    this.plan.push({ kind: "raw", response });
  }

  expectReject(error: Error): void {
    this.plan.push({ kind: "reject", error });
  }

  /** Queue a response held open until the returned release function runs. */
  expectPending(): (status: number, body: unknown) => void {
    let release!: (res: Response) => void;
    const promise = new Promise<Response>((resolve) => {
      release = resolve;
    });
    this.plan.push({ kind: "pending", promise });
    return (status, body) => release(jsonResponse(status, body));
  }

  get unconsumed(): number {
    return this.plan.length;
  }
}
