/**
 * Pure HTML renderers for the session view.
 * Rendering is a function of (view, config) returning a markup string, so
 * tests assert on output text without a browser.  Numbers are formatted for
 * reading but always derive from the exact service payload in the view.
 */

import type { SessionView } from "./store.js";
import type { Estimates, HealthResponse, TrajectoryPoint } from "./types.js";

export interface ViewConfig {
  /** false hides mid-session numbers (final results still show when done) */
  showTrajectory: boolean;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function formatTheta(value: number): string {
  return (value >= 0 ? "+" : "") + value.toFixed(3);
}

export function formatYhat(value: number): string {
  return value.toFixed(2);
}

export function renderEstimates(estimates: Estimates): string {
  const parts: string[] = [];
  if (estimates.theta !== undefined) {
    parts.push(
      `<span class="estimate theta">latent score ${formatTheta(estimates.theta)}</span>`,
    );
  }
  if (estimates.yhat !== undefined) {
    parts.push(
      `<span class="estimate yhat">predicted measure ${formatYhat(estimates.yhat)}</span>`,
    );
  }
  return parts.join(" · ");
}

export function renderTrajectory(points: TrajectoryPoint[]): string {
  if (points.length === 0) return "";
  const rows = points
    .map((p) => {
      const cells: string[] = [`step ${p.step}`];
      if (p.item_id !== undefined) cells.push(`question ${p.item_id}`);
      if (p.theta !== undefined) cells.push(`&theta; ${formatTheta(p.theta)}`);
      if (p.yhat !== undefined) cells.push(`&#374; ${formatYhat(p.yhat)}`);
      return `<li>${cells.join(" · ")}</li>`;
    })
    .join("");
  return `<ol class="trajectory">${rows}</ol>`;
}

/** Session controls offer exactly what the loaded bundle supports. */
export function renderControls(health: HealthResponse): string {
  const strategyOptions = health.bundle.strategies
    .map((s) => `<option value="${escapeHtml(s)}">${escapeHtml(s)}</option>`)
    .join("");
  const scoringOptions = health.bundle.scorings
    .map(
      (s) =>
        `<option value="${escapeHtml(s)}"${s === "both" ? " selected" : ""}>${escapeHtml(s)}</option>`,
    )
    .join("");
  const note = `${health.bundle.measure ?? "assessment"} · ${health.bundle.J} questions in bank`;
  return (
    `<label>strategy <select id="strategy">${strategyOptions}</select></label>` +
    `<label>scoring <select id="scoring">${scoringOptions}</select></label>` +
    `<button id="start">Start session</button>` +
    `<span class="bundle-note">${escapeHtml(note)}</span>`
  );
}

function renderBanner(view: SessionView): string {
  if (view.error === null) return "";
  const kind = view.error.retryable ? "error retryable" : "error";
  return (
    `<div class="banner ${kind}" data-code="${escapeHtml(view.error.code)}">` +
    `${escapeHtml(view.error.message)}` +
    (view.error.retryable ? ` <button id="retry">Try again</button>` : "") +
    `</div>`
  );
}

function renderQuestion(view: SessionView, config: ViewConfig): string {
  const q = view.question;
  if (q === null) return "";
  const submitting = view.phase === "submitting";
  const live =
    config.showTrajectory && (view.estimates.theta !== undefined || view.estimates.yhat !== undefined)
      ? `<p class="estimates">so far: ${renderEstimates(view.estimates)}</p>`
      : "";
  const trajectory = config.showTrajectory ? renderTrajectory(view.trajectory) : "";
  return `
<section class="question-card" data-item-id="${q.item_id}">
  <p class="step-label">Question ${view.step + 1}</p>
  <h2 class="question-text">${escapeHtml(q.text)}</h2>
  <p class="min-words-hint">Answer with at least ${q.min_words} descriptive word${q.min_words === 1 ? "" : "s"}.</p>
  <textarea id="answer" rows="3" ${submitting ? "disabled" : ""} placeholder="type your words here"></textarea>
  <p class="word-count"><span id="word-count">${q.min_words} more word${q.min_words === 1 ? "" : "s"} needed</span></p>
  <button id="submit" disabled>${submitting ? "Sending…" : "Submit answer"}</button>
  ${live}
  ${trajectory}
</section>`;
}

function renderSummary(view: SessionView, config: ViewConfig): string {
  return `
<section class="summary">
  <h2>Assessment complete</h2>
  <p class="final-estimates">${renderEstimates(view.estimates)}</p>
  <p class="steps-taken">${view.step} answers given</p>
  ${config.showTrajectory ? renderTrajectory(view.trajectory) : ""}
  <button id="start-over">Start another session</button>
</section>`;
}

export function renderApp(view: SessionView, config: ViewConfig): string {
  const banner = renderBanner(view);
  switch (view.phase) {
    case "idle":
      return `${banner}<p class="hint">Pick a strategy and start a session.</p>`;
    case "starting":
      return `${banner}<p class="hint">Contacting the assessment service…</p>`;
    case "asking":
    case "submitting":
      return banner + renderQuestion(view, config);
    case "done":
      return banner + renderSummary(view, config);
  }
}
