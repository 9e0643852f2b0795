// Entry point: wires the service client into the four views. All state
// transitions live in state.ts; everything here is fetching and DOM glue.

import { Api, HttpApi } from "./api.js";
import {
  BallotState,
  ReviewState,
  applyBatch,
  conflict,
  decisionApplied,
  emptyBallot,
  emptyReview,
  networkTrouble,
  quadrantLayout,
  togglePick,
} from "./state.js";
import {
  renderBallot,
  renderHeatmap,
  renderQuadrant,
  renderRanking,
  renderReview,
} from "./render.js";
import { QuestionnaireView, isApiFailure } from "./types.js";

const TABS = ["review", "quadrant", "delphi", "attitudes"] as const;
type Tab = (typeof TABS)[number];

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

export class App {
  private review: ReviewState = emptyReview();
  private ballot: BallotState = emptyBallot(5, 0);
  private questionnaire: QuestionnaireView | null = null;

  constructor(private api: Api, private root: Document) {}

  async start(): Promise<void> {
    for (const tab of TABS) {
      el(`tab-${tab}`).addEventListener("click", () => this.show(tab));
    }
    el("panel-review").addEventListener("click", (event) => this.onReviewClick(event));
    el("panel-delphi").addEventListener("click", (event) => this.onDelphiClick(event));
    el("panel-delphi").addEventListener("change", (event) => this.onDelphiToggle(event));
    await this.show("review");
  }

  private async show(tab: Tab): Promise<void> {
    for (const other of TABS) {
      el(`panel-${other}`).hidden = other !== tab;
      el(`tab-${other}`).classList.toggle("active", other === tab);
    }
    if (tab === "review") await this.refreshReview();
    if (tab === "quadrant") await this.refreshQuadrant();
    if (tab === "delphi") await this.refreshDelphi();
    if (tab === "attitudes") await this.refreshAttitudes();
  }

  private async refreshReview(): Promise<void> {
    try {
      const batch = await this.api.suggestions();
      this.review = applyBatch(this.review, batch);
    } catch (err) {
      if (isApiFailure(err)) this.review = networkTrouble(this.review, err.detail);
    }
    el("panel-review").innerHTML = renderReview(this.review);
  }

  private async onReviewClick(event: Event): Promise<void> {
    const button = (event.target as HTMLElement).closest("button[data-action]");
    if (!(button instanceof HTMLButtonElement)) return;
    const id = button.dataset.id ?? "";
    const action = button.dataset.action;
    try {
      const result =
        action === "accept"
          ? await this.api.acceptSuggestion(id, this.review.seq)
          : await this.api.rejectSuggestion(id, this.review.seq);
      this.review = decisionApplied(this.review, id, result.seq);
      el("panel-review").innerHTML = renderReview(this.review);
      await this.refreshReview();
    } catch (err) {
      if (isApiFailure(err) && err.status === 409) {
        this.review = conflict(this.review, err.detail);
        el("panel-review").innerHTML = renderReview(this.review);
        await this.refreshReview(); // automatic refresh after the banner
      } else if (isApiFailure(err)) {
        this.review = networkTrouble(this.review, err.detail);
        el("panel-review").innerHTML = renderReview(this.review);
      }
    }
  }

  private async refreshQuadrant(): Promise<void> {
    try {
      const scores = await this.api.scores();
      const layout = quadrantLayout(scores.variables, scores.medians);
      el("panel-quadrant").innerHTML = renderQuadrant(layout, scores.k_used, scores.converged);
    } catch (err) {
      el("panel-quadrant").innerHTML = `<p class="empty">scores unavailable${
        isApiFailure(err) ? `: ${err.detail}` : ""
      }</p>`;
    }
  }

  private async refreshDelphi(): Promise<void> {
    try {
      this.questionnaire = await this.api.questionnaire();
      if (this.ballot.total !== this.questionnaire.variables.length) {
        this.ballot = emptyBallot(this.questionnaire.k, this.questionnaire.variables.length);
      }
      this.renderDelphi();
    } catch (err) {
      el("panel-delphi").innerHTML = `<p class="empty">questionnaire unavailable</p>`;
    }
  }

  private renderDelphi(): void {
    if (!this.questionnaire) return;
    el("panel-delphi").innerHTML =
      `<div id="ballot">${renderBallot(this.questionnaire, this.ballot)}</div>` +
      `<div id="ranking"></div>`;
  }

  private onDelphiToggle(event: Event): void {
    const box = event.target as HTMLInputElement;
    if (!box.dataset.variable) return;
    this.ballot = togglePick(this.ballot, box.dataset.variable);
    this.renderDelphi();
  }

  private async onDelphiClick(event: Event): Promise<void> {
    const button = (event.target as HTMLElement).closest("button[data-action='submit-ballot']");
    if (!button || !this.questionnaire) return;
    const respondent = window.prompt("respondent id?", "anonymous") ?? "anonymous";
    try {
      await this.api.submitBallot(
        respondent,
        this.questionnaire.round,
        [...this.ballot.selected].sort(),
      );
      const ranking = await this.api.ranking(this.questionnaire.round);
      el("ranking").innerHTML = renderRanking(ranking);
    } catch (err) {
      if (isApiFailure(err)) {
        el("ranking").innerHTML = `<div class="banner conflict">rejected: ${err.detail}</div>`;
      }
    }
  }

  private async refreshAttitudes(): Promise<void> {
    try {
      const view = await this.api.attitudes();
      el("panel-attitudes").innerHTML = renderHeatmap(view);
    } catch (err) {
      el("panel-attitudes").innerHTML = `<p class="empty">attitudes unavailable${
        isApiFailure(err) ? `: ${err.detail}` : ""
      }</p>`;
    }
  }
}

declare global {
  interface Window {
    PROSPECT_BASE_URL?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("panel-review")) {
  const api = new HttpApi({ baseUrl: window.PROSPECT_BASE_URL ?? "" });
  new App(api, document).start().catch((err) => console.error(err));
}
