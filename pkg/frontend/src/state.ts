// Pure view state transitions. No fetches, no DOM: the main module feeds
// service responses in and renders whatever comes out.

import type { SuggestionBatch, SuggestionView, VariableScoreView } from "./types.js";

// ---------------------------------------------------------------------------
// Merge-review queue
// ---------------------------------------------------------------------------

export interface ReviewState {
  seq: number;
  queue: SuggestionView[];
  banner: string | null;
  bannerKind: "conflict" | "network" | null;
}

export function emptyReview(): ReviewState {
  return { seq: 0, queue: [], banner: null, bannerKind: null };
}

/** A fresh batch replaces the queue and clears any banner. */
export function applyBatch(state: ReviewState, batch: SuggestionBatch): ReviewState {
  return { seq: batch.journal_seq, queue: batch.suggestions, banner: null, bannerKind: null };
}

/** After a 200 decision the row disappears and the echoed seq advances. */
export function decisionApplied(state: ReviewState, id: string, seq: number): ReviewState {
  return { ...state, seq, queue: state.queue.filter((s) => s.id !== id) };
}

/** A 409 means someone else moved the journal: keep the queue visible but
 * banner it; the caller refreshes the batch right after. */
export function conflict(state: ReviewState, detail: string): ReviewState {
  return {
    ...state,
    banner: `Somebody changed the ontology first (409): ${detail}. Refreshing the queue.`,
    bannerKind: "conflict",
  };
}

export function networkTrouble(state: ReviewState, detail: string): ReviewState {
  return {
    ...state,
    banner: `Request failed: ${detail}. Nothing was lost; retry when the service is back.`,
    bannerKind: "network",
  };
}

// ---------------------------------------------------------------------------
// Ballot form: exactly k picks, the (k+1)th is blocked with the rule named
// ---------------------------------------------------------------------------

export interface BallotState {
  k: number;
  total: number;
  selected: ReadonlySet<string>;
  blocked: string | null;
}

export function emptyBallot(k: number, total: number): BallotState {
  return { k, total, selected: new Set(), blocked: null };
}

export function togglePick(state: BallotState, variableId: string): BallotState {
  const selected = new Set(state.selected);
  if (selected.has(variableId)) {
    selected.delete(variableId);
    return { ...state, selected, blocked: null };
  }
  if (selected.size >= state.k) {
    return {
      ...state,
      blocked: `choose exactly ${state.k} of the ${state.total} variables; unselect one first`,
    };
  }
  selected.add(variableId);
  return { ...state, selected, blocked: null };
}

export function ballotProblem(state: BallotState): string | null {
  if (state.selected.size !== state.k) {
    return `choose exactly ${state.k} of the ${state.total} variables (currently ${state.selected.size})`;
  }
  return null;
}

// ---------------------------------------------------------------------------
// Quadrant layout: scale service scores into an SVG viewport
// ---------------------------------------------------------------------------

export interface QuadrantPoint {
  id: string;
  label: string;
  x: number;
  y: number;
  isKey: boolean;
  quadrant: string;
}

export interface QuadrantLayout {
  points: QuadrantPoint[];
  medianX: number;
  medianY: number;
  width: number;
  height: number;
}

export function quadrantLayout(
  variables: VariableScoreView[],
  medians: { influence: number; dependence: number },
  width = 640,
  height = 480,
  pad = 40,
): QuadrantLayout {
  const maxDependence = Math.max(1, ...variables.map((v) => v.dependence));
  const maxInfluence = Math.max(1, ...variables.map((v) => v.influence));
  const sx = (value: number) => pad + (value / maxDependence) * (width - 2 * pad);
  // influence grows upward
  const sy = (value: number) => height - pad - (value / maxInfluence) * (height - 2 * pad);
  return {
    points: variables.map((v) => ({
      id: v.id,
      label: v.label,
      x: sx(v.dependence),
      y: sy(v.influence),
      isKey: v.is_key,
      quadrant: v.quadrant,
    })),
    medianX: sx(medians.dependence),
    medianY: sy(medians.influence),
    width,
    height,
  };
}

// ---------------------------------------------------------------------------
// Heatmap coloring
// ---------------------------------------------------------------------------

/** Attitude in [0,1] to a red..green HSL fill. */
export function attitudeColor(value: number): string {
  const clamped = Math.max(0, Math.min(1, value));
  return `hsl(${Math.round(clamped * 120)}, 70%, 45%)`;
}
