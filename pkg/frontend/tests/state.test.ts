import { describe, expect, it } from "vitest";

import {
  applyBatch,
  attitudeColor,
  ballotProblem,
  conflict,
  decisionApplied,
  emptyBallot,
  emptyReview,
  networkTrouble,
  quadrantLayout,
  togglePick,
} from "../src/state.js";
import type { SuggestionBatch, SuggestionView } from "../src/types.js";

function suggestion(id: string, rank: number): SuggestionView {
  return {
    id,
    kind: "criterion_to_concept",
    subject_id: `k-${id}`,
    subject_label: `subject ${id}`,
    target_id: `c-${id}`,
    target_label: `target ${id}`,
    score: 1 - rank / 100,
    rank,
    source: { source_id: "s1", raw_text: `raw ${id}`, span: [0, 5] },
  };
}

describe("review queue state", () => {
  const batch: SuggestionBatch = {
    journal_seq: 7,
    suggestions: [suggestion("a", 1), suggestion("b", 2)],
  };

  it("a batch replaces the queue and adopts the journal seq", () => {
    const state = applyBatch(emptyReview(), batch);
    expect(state.seq).toBe(7);
    expect(state.queue.map((s) => s.id)).toEqual(["a", "b"]);
    expect(state.banner).toBeNull();
  });

  it("an applied decision removes its row and advances the echoed seq", () => {
    const state = decisionApplied(applyBatch(emptyReview(), batch), "a", 8);
    expect(state.queue.map((s) => s.id)).toEqual(["b"]);
    expect(state.seq).toBe(8);
  });

  it("a 409 sets the conflict banner without dropping the queue", () => {
    const state = conflict(applyBatch(emptyReview(), batch), "journal moved");
    expect(state.bannerKind).toBe("conflict");
    expect(state.banner).toContain("409");
    expect(state.queue).toHaveLength(2);
  });

  it("network trouble names a retry and loses nothing", () => {
    const state = networkTrouble(applyBatch(emptyReview(), batch), "fetch failed");
    expect(state.bannerKind).toBe("network");
    expect(state.banner).toContain("retry");
    expect(state.queue).toHaveLength(2);
  });

  it("a fresh batch clears any banner", () => {
    const bannered = conflict(applyBatch(emptyReview(), batch), "x");
    expect(applyBatch(bannered, batch).banner).toBeNull();
  });
});

describe("ballot selection rule", () => {
  it("blocks the (k+1)th selection and names the rule", () => {
    let state = emptyBallot(5, 12);
    for (const id of ["v1", "v2", "v3", "v4", "v5"]) {
      state = togglePick(state, id);
      expect(state.blocked).toBeNull();
    }
    const blocked = togglePick(state, "v6");
    expect(blocked.selected.size).toBe(5);
    expect(blocked.blocked).toBe("choose exactly 5 of the 12 variables; unselect one first");
  });

  it("deselecting frees a slot again", () => {
    let state = emptyBallot(2, 4);
    state = togglePick(state, "v1");
    state = togglePick(state, "v2");
    state = togglePick(togglePick(state, "v1"), "v3");
    expect([...state.selected].sort()).toEqual(["v2", "v3"]);
    expect(state.blocked).toBeNull();
  });

  it("problem text tracks the current count", () => {
    let state = emptyBallot(2, 4);
    expect(ballotProblem(state)).toContain("currently 0");
    state = togglePick(togglePick(state, "v1"), "v2");
    expect(ballotProblem(state)).toBeNull();
  });
});

describe("quadrant layout", () => {
  it("scales points into the viewport with influence upward", () => {
    const layout = quadrantLayout(
      [
        { id: "a", label: "a", influence: 10, dependence: 0, quadrant: "driver", is_key: true },
        { id: "b", label: "b", influence: 0, dependence: 10, quadrant: "dependent", is_key: false },
      ],
      { influence: 5, dependence: 5 },
      640,
      480,
      40,
    );
    const [a, b] = layout.points;
    expect(a!.x).toBe(40); // zero dependence sits at the left pad
    expect(a!.y).toBe(40); // max influence sits at the top pad
    expect(b!.x).toBe(600);
    expect(b!.y).toBe(440);
    expect(layout.medianX).toBe(320);
    expect(layout.medianY).toBe(240);
  });

  it("marks keys for the renderer", () => {
    const layout = quadrantLayout(
      [{ id: "a", label: "a", influence: 1, dependence: 1, quadrant: "relay", is_key: true }],
      { influence: 1, dependence: 1 },
    );
    expect(layout.points[0]!.isKey).toBe(true);
  });
});

describe("attitude colors", () => {
  it("spans red to green and clamps", () => {
    expect(attitudeColor(0)).toBe("hsl(0, 70%, 45%)");
    expect(attitudeColor(1)).toBe("hsl(120, 70%, 45%)");
    expect(attitudeColor(0.5)).toBe("hsl(60, 70%, 45%)");
    expect(attitudeColor(2)).toBe(attitudeColor(1));
  });
});
