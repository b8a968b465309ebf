/**
 * Browser bootstrap: wires the store to the DOM.
 *
 * All session logic lives in SessionStore and the renderers; this module only
 * binds events, keeps the answer draft across re-renders, and remembers the
 * session id so a page refresh resumes where the respondent left off.
 */

import { ApiClient, ApiError } from "./client.js";
import { SessionStore } from "./store.js";
import { renderApp, renderControls, type ViewConfig } from "./view.js";
import type { HealthResponse, Scoring } from "./types.js";

const SESSION_KEY = "adaptest_session_id";

function apiBase(): string {
  const param = new URLSearchParams(window.location.search).get("api");
  return param ?? "";
}

function wordCountLabel(missing: number, total: number): string {
  if (missing <= 0) return `${total} word${total === 1 ? "" : "s"} — ready to submit`;
  return `${missing} more word${missing === 1 ? "" : "s"} needed`;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app element");

  const client = new ApiClient(apiBase());
  const store = new SessionStore(client);

  let health: HealthResponse;
  try {
    health = await client.health();
  } catch (err) {
    const message = err instanceof ApiError ? err.message : String(err);
    root.innerHTML = `<div class="banner error">Cannot reach the assessment service: ${message}</div>`;
    return;
  }

  const config: ViewConfig = {
    showTrajectory: health.bundle.score_exposure === "trajectory",
  };

  const controls = document.getElementById("controls");
  if (controls !== null) {
    controls.innerHTML = renderControls(health);
  }

  const session = document.getElementById("session");
  if (session === null) throw new Error("missing #session element");

  let draft = "";
  let draftStep = -1;

  function syncAnswerWidgets(): void {
    const textarea = session!.querySelector<HTMLTextAreaElement>("#answer");
    const counter = session!.querySelector<HTMLElement>("#word-count");
    const submit = session!.querySelector<HTMLButtonElement>("#submit");
    if (textarea === null) return;
    textarea.value = draft;
    const missing = store.wordsMissing(draft);
    const total = draft.trim() === "" ? 0 : draft.trim().split(/\s+/).length;
    if (counter !== null) counter.textContent = wordCountLabel(missing, total);
    if (submit !== null && store.getView().phase === "asking") {
      submit.disabled = missing > 0;
    }
    textarea.addEventListener("input", () => {
      draft = textarea.value;
      const nowMissing = store.wordsMissing(draft);
      const nowTotal = draft.trim() === "" ? 0 : draft.trim().split(/\s+/).length;
      if (counter !== null) counter.textContent = wordCountLabel(nowMissing, nowTotal);
      if (submit !== null) submit.disabled = nowMissing > 0;
    });
  }

  function bindActions(): void {
    session!.querySelector<HTMLButtonElement>("#submit")?.addEventListener("click", () => {
      void store.submit(draft);
    });
    session!.querySelector<HTMLButtonElement>("#retry")?.addEventListener("click", () => {
      const view = store.getView();
      if (view.phase === "idle") startFromControls();
    });
    session!.querySelector<HTMLButtonElement>("#start-over")?.addEventListener("click", () => {
      window.sessionStorage.removeItem(SESSION_KEY);
      window.location.reload();
    });
  }

  function startFromControls(): void {
    const strategy = document.querySelector<HTMLSelectElement>("#strategy")?.value ?? "alirt";
    const picked = document.querySelector<HTMLSelectElement>("#scoring")?.value;
    const scoring: Scoring =
      picked === "latent" || picked === "ctt" || picked === "both" ? picked : "both";
    void store.start(strategy, scoring);
  }

  store.subscribe((view) => {
    if (view.step !== draftStep) {
      draft = "";
      draftStep = view.step;
    }
    if (view.sessionId !== null && !view.done) {
      window.sessionStorage.setItem(SESSION_KEY, view.sessionId);
    }
    if (view.done) {
      window.sessionStorage.removeItem(SESSION_KEY);
    }
    session!.innerHTML = renderApp(view, config);
    syncAnswerWidgets();
    bindActions();
  });

  document.getElementById("start")?.addEventListener("click", startFromControls);

  const saved = window.sessionStorage.getItem(SESSION_KEY);
  if (saved !== null) {
    await store.restore(saved);
    const view = store.getView();
    if (view.sessionId === null) window.sessionStorage.removeItem(SESSION_KEY);
  } else {
    session.innerHTML = renderApp(store.getView(), config);
  }
}

void boot();
