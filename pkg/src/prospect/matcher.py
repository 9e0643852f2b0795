"""Text-similarity suggestions for grouping criteria and merging concepts.

Scores are exact rationals: the maximum of a stop-word-filtered token-set
Jaccard and a normalized edit-distance similarity. Matching never mutates
anything by itself; a facilitator accepts or rejects each suggestion and
both decisions land in the journal. Rejected pairs are suppressed from all
later batches. Every accepted merge grows the surviving concept's label
registry, so old wordings keep attracting matches.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .corpus import normalize
from .errors import StaleSuggestionError, ValidationError
from .ontology import Project

DEFAULT_THRESHOLD = Fraction(3, 5)


@lru_cache(maxsize=None)
def stopwords(languages: tuple[str, ...] = ("fr", "en")) -> frozenset[str]:
    words: set[str] = set()
    for lang in languages:
        data = resources.files("prospect.data").joinpath(f"stopwords_{lang}.txt")
        words.update(w.strip() for w in data.read_text(encoding="utf-8").split() if w.strip())
    return frozenset(words)


def _levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def similarity(a: str, b: str, stop: frozenset[str] | None = None) -> Fraction:
    """Similarity of two already-normalized texts, in [0, 1].

    max(token-set Jaccard after stop-word removal, 1 - edit distance over
    the longer length). Symmetric; equal inputs always score 1.
    """
    stop = stopwords() if stop is None else stop
    tokens_a = {t for t in a.split() if t not in stop}
    tokens_b = {t for t in b.split() if t not in stop}
    if tokens_a or tokens_b:
        jaccard = Fraction(len(tokens_a & tokens_b), len(tokens_a | tokens_b))
    else:
        jaccard = Fraction(0)
    longest = max(len(a), len(b))
    edit = Fraction(1) if longest == 0 else 1 - Fraction(_levenshtein(a, b), longest)
    return max(jaccard, edit)


@dataclass(frozen=True)
class Suggestion:
    kind: str  # "criterion_to_concept" | "concept_merge"
    subject_id: str
    target_id: str
    subject_label: str
    target_label: str
    score: Fraction
    rank: int

    @property
    def pair(self) -> tuple[str, str, str]:
        return (self.kind, self.subject_id, self.target_id)


def suggest(project: Project, threshold: Fraction | None = None,
            limit: int | None = None) -> list[Suggestion]:
    """Rank candidate groupings above the threshold.

    Deterministic: sorted by score descending, then subject label, then
    target label. Criteria already assigned to a concept are not proposed
    again; concept targets are scored against their whole label registry.
    """
    if threshold is None:
        threshold = project.config.threshold
    threshold = Fraction(threshold)
    if not 0 <= threshold <= 1:
        raise ValidationError(f"threshold must be within [0, 1], got {threshold}")
    stop = stopwords(project.config.stopword_languages)
    state = project.state
    corpus = project.corpus

    registries = {
        cid: concept.registered_texts(corpus) for cid, concept in state.concepts.items()
    }
    candidates: list[tuple] = []

    unassigned = [
        corpus.criteria[cid]
        for cid in sorted(corpus.criteria)
        if cid not in state.criterion_assignment
    ]
    for criterion in unassigned:
        for cid in sorted(state.concepts):
            if ("criterion_to_concept", criterion.id, cid) in state.suppressed:
                continue
            texts = registries[cid]
            if not texts:
                continue
            score = max(similarity(criterion.normalized_text, t, stop) for t in texts)
            if score >= threshold:
                candidates.append(
                    (
                        "criterion_to_concept",
                        criterion.id,
                        cid,
                        criterion.normalized_text,
                        state.concepts[cid].label,
                        score,
                    )
                )

    concept_ids = sorted(state.concepts)
    for i, a in enumerate(concept_ids):
        for b in concept_ids[i + 1 :]:
            first, second = sorted(
                (a, b), key=lambda cid: (state.concepts[cid].label, cid)
            )
            # labels can change across merges, so check both orientations
            if ("concept_merge", first, second) in state.suppressed or (
                "concept_merge", second, first) in state.suppressed:
                continue
            texts_a, texts_b = registries[first], registries[second]
            if not texts_a or not texts_b:
                continue
            score = max(similarity(x, y, stop) for x in texts_a for y in texts_b)
            if score >= threshold:
                candidates.append(
                    (
                        "concept_merge",
                        first,
                        second,
                        state.concepts[first].label,
                        state.concepts[second].label,
                        score,
                    )
                )

    candidates.sort(key=lambda c: (-c[5], c[3], c[4], c[1], c[2]))
    if limit is not None:
        candidates = candidates[:limit]
    return [
        Suggestion(kind=k, subject_id=s, target_id=t, subject_label=sl,
                   target_label=tl, score=score, rank=rank)
        for rank, (k, s, t, sl, tl, score) in enumerate(candidates, start=1)
    ]


def check_applicable(project: Project, kind: str, subject_id: str, target_id: str) -> None:
    """Raise StaleSuggestionError unless the pair still makes sense."""
    state = project.state
    if kind == "criterion_to_concept":
        if subject_id not in project.corpus.criteria or target_id not in state.concepts:
            raise StaleSuggestionError(
                f"suggestion {subject_id!r}->{target_id!r} no longer resolves"
            )
        if subject_id in state.criterion_assignment:
            raise StaleSuggestionError(
                f"criterion {subject_id!r} was assigned in the meantime"
            )
    elif kind == "concept_merge":
        if (
            subject_id not in state.concepts
            or target_id not in state.concepts
            or subject_id == target_id
        ):
            raise StaleSuggestionError(
                f"merge {subject_id!r}+{target_id!r} no longer applies"
            )
    else:
        raise ValidationError(f"unknown suggestion kind {kind!r}")
    suppressed = (kind, subject_id, target_id) in state.suppressed or (
        kind == "concept_merge" and (kind, target_id, subject_id) in state.suppressed
    )
    if suppressed:
        raise StaleSuggestionError(
            f"pair {subject_id!r}->{target_id!r} was rejected earlier"
        )


def accept(project: Project, suggestion: Suggestion, actor: str = "facilitator",
           timestamp: str | None = None) -> int:
    """Apply the suggested grouping through the journal.

    Merges keep the target concept and its label; the subject concept's
    label joins the survivor's registry.
    """
    check_applicable(project, suggestion.kind, suggestion.subject_id, suggestion.target_id)
    payload = {
        "kind": suggestion.kind,
        "subject_id": suggestion.subject_id,
        "target_id": suggestion.target_id,
    }
    if suggestion.kind == "concept_merge":
        payload["keep_label"] = project.state.concepts[suggestion.target_id].label
    return project.commit("accept_suggestion", payload, actor, timestamp)


def reject(project: Project, suggestion: Suggestion, actor: str = "facilitator",
           timestamp: str | None = None) -> int:
    """Suppress the pair from all future batches."""
    return project.commit(
        "reject_suggestion",
        {
            "kind": suggestion.kind,
            "subject_id": suggestion.subject_id,
            "target_id": suggestion.target_id,
        },
        actor,
        timestamp,
    )


SUGGESTION_CSV_COLUMNS = [
    "rank", "kind", "subject_id", "subject_label", "target_id", "target_label",
    "score", "decision",
]


def write_suggestions_csv(suggestions: list[Suggestion], path) -> None:
    """Export a batch for offline review; the decision column starts empty."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUGGESTION_CSV_COLUMNS)
        for s in suggestions:
            writer.writerow(
                [s.rank, s.kind, s.subject_id, s.subject_label, s.target_id,
                 s.target_label, f"{float(s.score):.6f}", ""]
            )


def apply_decisions_csv(project: Project, path, actor: str = "facilitator") -> dict:
    """Apply a reviewed suggestions CSV; decision is accept, reject or blank.

    Returns counts of applied, rejected, skipped and stale rows.
    """
    outcome = {"accepted": 0, "rejected": 0, "skipped": 0, "stale": 0}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"kind", "subject_id", "target_id", "decision"}
        have = set(reader.fieldnames or ())
        if not required <= have:
            raise ValidationError(f"{path}: missing CSV columns {sorted(required - have)}")
        for row in reader:
            decision = (row.get("decision") or "").strip().lower()
            suggestion = Suggestion(
                kind=row["kind"].strip(),
                subject_id=row["subject_id"].strip(),
                target_id=row["target_id"].strip(),
                subject_label=row.get("subject_label", ""),
                target_label=row.get("target_label", ""),
                score=Fraction(0),
                rank=0,
            )
            if decision == "accept":
                try:
                    accept(project, suggestion, actor=actor)
                    outcome["accepted"] += 1
                except StaleSuggestionError:
                    outcome["stale"] += 1
            elif decision == "reject":
                reject(project, suggestion, actor=actor)
                outcome["rejected"] += 1
            elif decision == "":
                outcome["skipped"] += 1
            else:
                raise ValidationError(f"unknown decision {decision!r} in {path}")
    return outcome
