// HTML/SVG string rendering. Pure functions so the views are testable
// without a DOM; main.ts owns insertion and event wiring.

import type { AttitudesView, QuestionnaireView, RankingView, SuggestionView } from "./types.js";
import {
  BallotState,
  QuadrantLayout,
  ReviewState,
  attitudeColor,
  ballotProblem,
} from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

// ---------------------------------------------------------------------------
// Merge-review board
// ---------------------------------------------------------------------------

function sourceNote(suggestion: SuggestionView): string {
  if (!suggestion.source) return "";
  const span = suggestion.source.span
    ? ` [${suggestion.source.span[0]}..${suggestion.source.span[1]}]`
    : "";
  return `<div class="source">from ${escapeHtml(suggestion.source.source_id)}${span}:
    "${escapeHtml(suggestion.source.raw_text)}"</div>`;
}

export function renderReview(state: ReviewState): string {
  const banner = state.banner
    ? `<div class="banner ${state.bannerKind}">${escapeHtml(state.banner)}</div>`
    : "";
  if (state.queue.length === 0) {
    return `${banner}<p class="empty">No suggestions above the threshold.</p>`;
  }
  const rows = state.queue
    .map(
      (s) => `
  <tr data-id="${s.id}">
    <td class="rank">${s.rank}</td>
    <td><span class="kind ${s.kind}">${s.kind === "concept_merge" ? "merge" : "group"}</span></td>
    <td>${escapeHtml(s.subject_label)}${sourceNote(s)}</td>
    <td>${escapeHtml(s.target_label)}</td>
    <td class="score">${s.score.toFixed(3)}</td>
    <td>
      <button class="accept" data-action="accept" data-id="${s.id}">accept</button>
      <button class="reject" data-action="reject" data-id="${s.id}">reject</button>
    </td>
  </tr>`,
    )
    .join("");
  return `${banner}
<table class="review">
  <thead><tr><th>#</th><th></th><th>subject</th><th>into</th><th>score</th><th></th></tr></thead>
  <tbody>${rows}</tbody>
</table>`;
}

// ---------------------------------------------------------------------------
// Quadrant scatter
// ---------------------------------------------------------------------------

export function renderQuadrant(layout: QuadrantLayout, kUsed: number, converged: boolean): string {
  const points = layout.points
    .map((p) => {
      const cls = p.isKey ? "point key" : "point";
      const r = p.isKey ? 8 : 5;
      return `<g class="${cls}" data-id="${p.id}">
  <circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="${r}"></circle>
  <text x="${(p.x + 10).toFixed(1)}" y="${(p.y + 4).toFixed(1)}">${escapeHtml(p.label)}</text>
</g>`;
    })
    .join("\n");
  const note = converged ? `stabilized at power ${kUsed}` : `not stabilized within ${kUsed} powers`;
  return `<svg viewBox="0 0 ${layout.width} ${layout.height}" class="quadrant" role="img">
  <line class="median" x1="${layout.medianX.toFixed(1)}" y1="0" x2="${layout.medianX.toFixed(1)}" y2="${layout.height}"></line>
  <line class="median" x1="0" y1="${layout.medianY.toFixed(1)}" x2="${layout.width}" y2="${layout.medianY.toFixed(1)}"></line>
  <text class="axis" x="${layout.width - 120}" y="${layout.height - 8}">dependence</text>
  <text class="axis" x="8" y="16">influence</text>
  ${points}
</svg>
<p class="note">${note}; key variables highlighted.</p>`;
}

// ---------------------------------------------------------------------------
// Delphi ballot
// ---------------------------------------------------------------------------

export function renderBallot(q: QuestionnaireView, state: BallotState): string {
  const prior = q.prior_ranking.length
    ? `<p class="prior">previous round ranking: ${q.prior_ranking.map(escapeHtml).join(", ")}</p>`
    : "";
  const options = q.variables
    .map((option) => {
      const checked = state.selected.has(option.id) ? " checked" : "";
      const modalities = option.modalities.length
        ? `<span class="modalities">(${option.modalities.map(escapeHtml).join("; ")})</span>`
        : "";
      return `<label class="option">
  <input type="checkbox" data-variable="${option.id}"${checked}>
  ${escapeHtml(option.label)} ${modalities}
</label>`;
    })
    .join("\n");
  const problem = ballotProblem(state);
  const blocked = state.blocked
    ? `<div class="banner conflict">blocked: ${escapeHtml(state.blocked)}</div>`
    : "";
  const submit = problem
    ? `<button class="submit" disabled title="${escapeHtml(problem)}">submit ballot</button>`
    : `<button class="submit" data-action="submit-ballot">submit ballot</button>`;
  return `<h3>round ${q.round}: choose exactly ${q.k} of the ${q.variables.length} variables</h3>
${prior}${blocked}
<div class="options">${options}</div>
<p class="count">${state.selected.size} / ${q.k} selected</p>
${submit}`;
}

export function renderRanking(view: RankingView): string {
  const rows = view.ranking
    .map((vid, i) => `<tr><td>${i + 1}</td><td>${escapeHtml(vid)}</td><td>${view.counts[vid] ?? 0}</td></tr>`)
    .join("");
  return `<table class="ranking">
  <thead><tr><th>#</th><th>variable</th><th>approvals</th></tr></thead>
  <tbody>${rows}</tbody>
</table>
<p class="note">${view.valid_ballots} valid of ${view.total_ballots} ballots.</p>`;
}

// ---------------------------------------------------------------------------
// Attitude heatmap
// ---------------------------------------------------------------------------

export function renderHeatmap(view: AttitudesView): string {
  const header = view.scopes
    .map((s) => `<th title="${escapeHtml(s.scope)}">${escapeHtml(s.label)}</th>`)
    .join("");
  const rows = view.stakeholders
    .map((sid) => {
      const cells = view.scopes
        .map((scope) => {
          const value = view.cells[sid]?.[scope.scope];
          if (value === undefined) {
            return `<td class="absent" title="no evidence">n/a</td>`;
          }
          return `<td class="cell" style="background:${attitudeColor(value)}"
  data-value="${value}">${value.toFixed(2)}</td>`;
        })
        .join("");
      return `<tr><th>${escapeHtml(sid)}</th>${cells}</tr>`;
    })
    .join("");
  return `<p class="note">attitudes toward ${escapeHtml(view.alternative_id)}</p>
<table class="heatmap">
  <thead><tr><th></th>${header}</tr></thead>
  <tbody>${rows}</tbody>
</table>`;
}
