"""Source texts and the verbatim criteria extracted from them.

A corpus is an immutable snapshot: ingesting new material replaces the
snapshot, all later grouping work happens in the journaled ontology state.
"""

from __future__ import annotations

import csv
import unicodedata
from dataclasses import dataclass, field, replace

from .errors import DuplicateIdError, UnknownIdError, ValidationError

SOURCE_KINDS = ("interview", "document")

# NFKD does not decompose French ligatures, so fold them by hand before
# stripping combining marks.
_LIGATURES = {"œ": "oe", "æ": "ae"}


def normalize(raw: str) -> str:
    """Normalize a verbatim span for matching.

    Lower-cases, folds diacritics and ligatures, replaces punctuation and
    apostrophes with spaces, collapses whitespace and trims. Idempotent.
    """
    # decompose before case-folding: compatibility characters may only
    # reveal their case once decomposed (and case-folding can surface new
    # decomposable characters, hence the second pass)
    text = unicodedata.normalize("NFKD", raw).casefold()
    text = unicodedata.normalize("NFKD", text)
    for src, repl in _LIGATURES.items():
        text = text.replace(src, repl)
    text = "".join(ch for ch in text if not unicodedata.combining(ch))
    text = "".join(ch if ch.isalnum() else " " for ch in text)
    return " ".join(text.split())


@dataclass(frozen=True)
class SourceText:
    id: str
    kind: str  # "interview" or "document"
    title: str = ""
    stakeholder_category: str | None = None
    date: str | None = None  # ISO-8601

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValidationError(
                f"source {self.id!r}: kind must be one of {SOURCE_KINDS}, got {self.kind!r}"
            )


@dataclass(frozen=True)
class Criterion:
    """A verbatim word or phrase lifted from one source.

    Identical phrases from different sources stay distinct records.
    ``concept_id`` is a view field filled from the ontology state; it is
    never part of the stored corpus.
    """

    id: str
    raw_text: str
    source_id: str
    normalized_text: str = ""
    span: tuple[int, int] | None = None
    concept_id: str | None = None

    def __post_init__(self):
        if not self.raw_text:
            raise ValidationError(f"criterion {self.id!r}: raw_text must be non-empty")
        expected = normalize(self.raw_text)
        if not self.normalized_text:
            object.__setattr__(self, "normalized_text", expected)
        elif self.normalized_text != expected:
            raise ValidationError(
                f"criterion {self.id!r}: normalized_text does not match normalize(raw_text)"
            )


@dataclass
class Corpus:
    sources: dict[str, SourceText] = field(default_factory=dict)
    criteria: dict[str, Criterion] = field(default_factory=dict)

    @property
    def interview_count(self) -> int:
        return sum(1 for s in self.sources.values() if s.kind == "interview")

    @property
    def document_count(self) -> int:
        return sum(1 for s in self.sources.values() if s.kind == "document")

    @property
    def source_count(self) -> int:
        return len(self.sources)

    def add_source(self, source: SourceText, location: str = "") -> None:
        if source.id in self.sources:
            raise DuplicateIdError(
                f"duplicate source id {source.id!r}" + (f" ({location})" if location else "")
            )
        self.sources[source.id] = source

    def add_criterion(self, criterion: Criterion, location: str = "") -> None:
        where = f" ({location})" if location else ""
        if criterion.id in self.criteria:
            raise DuplicateIdError(f"duplicate criterion id {criterion.id!r}" + where)
        if criterion.source_id not in self.sources:
            raise UnknownIdError(
                f"criterion {criterion.id!r} references unknown source {criterion.source_id!r}"
                + where
            )
        self.criteria[criterion.id] = criterion

    def criterion_with_assignment(self, criterion_id: str, concept_id: str | None) -> Criterion:
        return replace(self.criteria[criterion_id], concept_id=concept_id)


def load_corpus(path) -> Corpus:
    """Load the corpus section of a project file.

    Accepts the regular ``.prospect.json`` exchange format.
    """
    from .store import load

    return load(path).corpus


def import_sources_csv(corpus: Corpus, path) -> int:
    """Add sources from a CSV with columns source_id, kind, title[, stakeholder_category, date]."""
    added = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require_columns(reader, {"source_id", "kind", "title"}, path)
        for lineno, row in enumerate(reader, start=2):
            source = SourceText(
                id=row["source_id"].strip(),
                kind=row["kind"].strip(),
                title=row.get("title", "").strip(),
                stakeholder_category=(row.get("stakeholder_category") or "").strip() or None,
                date=(row.get("date") or "").strip() or None,
            )
            corpus.add_source(source, location=f"{path}:{lineno}")
            added += 1
    return added


def import_criteria_csv(corpus: Corpus, path) -> int:
    """Add criteria from a CSV with columns criterion_id, raw_text, source_id[, span_start, span_end]."""
    added = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require_columns(reader, {"criterion_id", "raw_text", "source_id"}, path)
        for lineno, row in enumerate(reader, start=2):
            span = None
            start, end = (row.get("span_start") or "").strip(), (row.get("span_end") or "").strip()
            if start and end:
                try:
                    span = (int(start), int(end))
                except ValueError:
                    raise ValidationError(f"bad span at {path}:{lineno}: {start!r}..{end!r}")
            criterion = Criterion(
                id=row["criterion_id"].strip(),
                raw_text=row["raw_text"],
                source_id=row["source_id"].strip(),
                span=span,
            )
            corpus.add_criterion(criterion, location=f"{path}:{lineno}")
            added += 1
    return added


def _require_columns(reader: csv.DictReader, needed: set[str], path) -> None:
    have = set(reader.fieldnames or ())
    missing = needed - have
    if missing:
        raise ValidationError(f"{path}: missing CSV columns {sorted(missing)}")
