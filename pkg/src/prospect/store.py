"""Versioned persistence of the whole project in one canonical JSON file.

The file is a single document: format version, a SHA-256 checksum of the
canonical payload bytes, and the payload itself. Canonical means sorted
keys, two-space indent and no floats (rationals are stored as strings), so
saving what was just loaded reproduces the file byte for byte and diffs
stay readable. Files written by newer format versions are rejected; older
ones are migrated forward at load.
"""

from __future__ import annotations

import hashlib
import json
import os
from fractions import Fraction

from filelock import FileLock

from .corpus import Corpus, Criterion, SourceText
from .delphi import DelphiBallot
from .errors import (
    ChecksumError,
    ProjectFileError,
    SchemaError,
    VersionError,
    WorkbenchError,
)
from .ontology import (
    Aim,
    Alternative,
    Concept,
    DecisionRecord,
    MCriterion,
    Modality,
    MyChoiceDataset,
    Project,
    ProjectConfig,
    ProjectState,
    PropertyInstance,
    Variable,
    empty_alignment_payload,
    replay,
)
from .structural import InfluenceRelation

FORMAT_VERSION = 2

PROJECT_SUFFIX = ".prospect.json"


def canonical_bytes(payload) -> bytes:
    return (
        json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
    ).encode("utf-8")


def _checksum(payload: dict) -> str:
    return hashlib.sha256(canonical_bytes(payload)).hexdigest()


# ---------------------------------------------------------------------------
# Payload construction
# ---------------------------------------------------------------------------


def corpus_to_payload(corpus: Corpus) -> dict:
    return {
        "sources": [
            {
                "id": s.id,
                "kind": s.kind,
                "title": s.title,
                "stakeholder_category": s.stakeholder_category,
                "date": s.date,
            }
            for _, s in sorted(corpus.sources.items())
        ],
        "criteria": [
            {
                "id": c.id,
                "raw_text": c.raw_text,
                "normalized_text": c.normalized_text,
                "source_id": c.source_id,
                "span": list(c.span) if c.span else None,
            }
            for _, c in sorted(corpus.criteria.items())
        ],
    }


def state_to_payload(state: ProjectState) -> dict:
    mc = state.mychoice
    return {
        "godet": {
            "concepts": [
                {
                    "id": c.id,
                    "label": c.label,
                    "criterion_ids": sorted(c.criterion_ids),
                    "variable_ids": sorted(c.variable_ids),
                    "extra_labels": sorted(c.extra_labels),
                }
                for _, c in sorted(state.concepts.items())
            ],
            "variables": [
                {
                    "id": v.id,
                    "label": v.label,
                    "modalities": [m.label for m in v.modalities],
                }
                for _, v in sorted(state.variables.items())
            ],
        },
        "mychoice": {
            "mcriteria": [
                {"id": m.id, "label": m.label} for _, m in sorted(mc.mcriteria.items())
            ],
            "aims": [
                {"id": a.id, "label": a.label, "mcriterion_id": a.mcriterion_id}
                for _, a in sorted(mc.aims.items())
            ],
            "properties": [
                {
                    "id": p.id,
                    "denomination": p.denomination,
                    "value": p.value,
                    "evaluation": p.evaluation,
                    "aim_id": p.aim_id,
                    "stakeholder_id": p.stakeholder_id,
                    "weight": str(p.weight),
                }
                for _, p in sorted(mc.properties.items())
            ],
            "alternatives": [
                {"id": a.id, "label": a.label}
                for _, a in sorted(mc.alternatives.items())
            ],
        },
        "relations": [
            {
                "from_concept": r.from_concept,
                "to_concept": r.to_concept,
                "weight": r.weight,
                "source_id": r.source_id,
            }
            for r in state.relations
        ],
        "ballots": [
            {
                "respondent_id": b.respondent_id,
                "round": b.round,
                "chosen_variable_ids": sorted(b.chosen_variable_ids),
            }
            for b in state.ballots
        ],
        "alignment_map": state.alignment_map,
        "suppressed_suggestions": [list(t) for t in sorted(state.suppressed)],
    }


def state_bytes(state: ProjectState) -> bytes:
    """Canonical serialized state, used for replay equivalence checks."""
    return canonical_bytes(state_to_payload(state))


def journal_to_payload(journal: list[DecisionRecord]) -> list[dict]:
    return [
        {
            "seq": r.seq,
            "actor": r.actor,
            "action": r.action,
            "payload": r.payload,
            "timestamp": r.timestamp,
        }
        for r in journal
    ]


def journal_ndjson(journal: list[DecisionRecord]) -> str:
    """Newline-delimited export, one canonical JSON record per line."""
    lines = [
        json.dumps(record, sort_keys=True, ensure_ascii=False)
        for record in journal_to_payload(journal)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def config_to_payload(config: ProjectConfig) -> dict:
    return {
        "threshold": str(config.threshold),
        "k_max": config.k_max,
        "n_keys": config.n_keys,
        "delphi_k": config.delphi_k,
        "delphi_rounds": config.delphi_rounds,
        "stopword_languages": list(config.stopword_languages),
    }


def project_to_payload(project: Project) -> dict:
    return {
        "config": config_to_payload(project.config),
        "corpus": corpus_to_payload(project.corpus),
        "journal": journal_to_payload(project.journal),
        "state": state_to_payload(project.state),
    }


def project_bytes(project: Project) -> bytes:
    payload = project_to_payload(project)
    document = {
        "format_version": FORMAT_VERSION,
        "checksum": _checksum(payload),
        "payload": payload,
    }
    return canonical_bytes(document)


# ---------------------------------------------------------------------------
# Payload parsing (schema errors carry JSON-pointer locations)
# ---------------------------------------------------------------------------


def _expect(condition: bool, message: str, pointer: str) -> None:
    if not condition:
        raise SchemaError(message, pointer)


def _get(obj: dict, key: str, kind, pointer: str):
    _expect(isinstance(obj, dict), "expected an object", pointer)
    _expect(key in obj, f"missing key {key!r}", pointer)
    value = obj[key]
    if kind is not None:
        _expect(isinstance(value, kind), f"{key!r} has the wrong type", f"{pointer}/{key}")
    return value


def corpus_from_payload(payload: dict, pointer: str = "/corpus") -> Corpus:
    corpus = Corpus()
    sources = _get(payload, "sources", list, pointer)
    for i, raw in enumerate(sources):
        where = f"{pointer}/sources/{i}"
        try:
            source = SourceText(
                id=str(_get(raw, "id", str, where)),
                kind=str(_get(raw, "kind", str, where)),
                title=str(raw.get("title") or ""),
                stakeholder_category=raw.get("stakeholder_category"),
                date=raw.get("date"),
            )
            corpus.add_source(source, location=where)
        except WorkbenchError:
            raise
        except Exception as exc:  # noqa: BLE001
            raise SchemaError(f"bad source: {exc}", where)
    criteria = _get(payload, "criteria", list, pointer)
    for i, raw in enumerate(criteria):
        where = f"{pointer}/criteria/{i}"
        span = raw.get("span")
        try:
            criterion = Criterion(
                id=str(_get(raw, "id", str, where)),
                raw_text=str(_get(raw, "raw_text", str, where)),
                source_id=str(_get(raw, "source_id", str, where)),
                normalized_text=str(raw.get("normalized_text") or ""),
                span=tuple(span) if span else None,
            )
            corpus.add_criterion(criterion, location=where)
        except WorkbenchError:
            raise
        except Exception as exc:  # noqa: BLE001
            raise SchemaError(f"bad criterion: {exc}", where)
    return corpus


def state_from_payload(payload: dict, pointer: str = "/state") -> ProjectState:
    state = ProjectState()
    godet = _get(payload, "godet", dict, pointer)
    for i, raw in enumerate(_get(godet, "variables", list, f"{pointer}/godet")):
        where = f"{pointer}/godet/variables/{i}"
        vid = str(_get(raw, "id", str, where))
        variable = Variable(id=vid, label=str(_get(raw, "label", str, where)))
        for label in raw.get("modalities", []):
            variable.modalities.append(Modality(label=str(label), variable_id=vid))
        state.variables[vid] = variable
    for i, raw in enumerate(_get(godet, "concepts", list, f"{pointer}/godet")):
        where = f"{pointer}/godet/concepts/{i}"
        cid = str(_get(raw, "id", str, where))
        concept = Concept(
            id=cid,
            label=str(_get(raw, "label", str, where)),
            criterion_ids=set(raw.get("criterion_ids", [])),
            variable_ids=set(raw.get("variable_ids", [])),
            extra_labels=set(raw.get("extra_labels", [])),
        )
        state.concepts[cid] = concept
        for crit_id in concept.criterion_ids:
            state.criterion_assignment[crit_id] = cid

    mc_raw = _get(payload, "mychoice", dict, pointer)
    mc = MyChoiceDataset()
    for i, raw in enumerate(_get(mc_raw, "mcriteria", list, f"{pointer}/mychoice")):
        where = f"{pointer}/mychoice/mcriteria/{i}"
        mid = str(_get(raw, "id", str, where))
        mc.mcriteria[mid] = MCriterion(id=mid, label=str(_get(raw, "label", str, where)))
    for i, raw in enumerate(_get(mc_raw, "aims", list, f"{pointer}/mychoice")):
        where = f"{pointer}/mychoice/aims/{i}"
        aid = str(_get(raw, "id", str, where))
        mc.aims[aid] = Aim(
            id=aid,
            label=str(_get(raw, "label", str, where)),
            mcriterion_id=str(_get(raw, "mcriterion_id", str, where)),
        )
    for i, raw in enumerate(_get(mc_raw, "properties", list, f"{pointer}/mychoice")):
        where = f"{pointer}/mychoice/properties/{i}"
        pid = str(_get(raw, "id", str, where))
        try:
            weight = Fraction(str(raw.get("weight", "1")))
        except (ValueError, ZeroDivisionError):
            raise SchemaError("bad weight", f"{where}/weight")
        mc.properties[pid] = PropertyInstance(
            id=pid,
            denomination=str(_get(raw, "denomination", str, where)),
            value=str(raw.get("value") or ""),
            evaluation=str(_get(raw, "evaluation", str, where)),
            aim_id=str(_get(raw, "aim_id", str, where)),
            stakeholder_id=str(_get(raw, "stakeholder_id", str, where)),
            weight=weight,
        )
    for i, raw in enumerate(_get(mc_raw, "alternatives", list, f"{pointer}/mychoice")):
        where = f"{pointer}/mychoice/alternatives/{i}"
        aid = str(_get(raw, "id", str, where))
        mc.alternatives[aid] = Alternative(id=aid, label=str(_get(raw, "label", str, where)))
    state.mychoice = mc

    for i, raw in enumerate(_get(payload, "relations", list, pointer)):
        where = f"{pointer}/relations/{i}"
        try:
            state.relations.append(
                InfluenceRelation(
                    from_concept=str(_get(raw, "from_concept", str, where)),
                    to_concept=str(_get(raw, "to_concept", str, where)),
                    weight=int(_get(raw, "weight", int, where)),
                    source_id=str(_get(raw, "source_id", str, where)),
                )
            )
        except WorkbenchError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(str(exc), where)
    for i, raw in enumerate(_get(payload, "ballots", list, pointer)):
        where = f"{pointer}/ballots/{i}"
        state.ballots.append(
            DelphiBallot(
                respondent_id=str(_get(raw, "respondent_id", str, where)),
                round=int(_get(raw, "round", int, where)),
                chosen_variable_ids=frozenset(
                    str(v) for v in _get(raw, "chosen_variable_ids", list, where)
                ),
            )
        )
    base = empty_alignment_payload()
    base.update(_get(payload, "alignment_map", dict, pointer))
    state.alignment_map = base
    for i, raw in enumerate(_get(payload, "suppressed_suggestions", list, pointer)):
        where = f"{pointer}/suppressed_suggestions/{i}"
        _expect(isinstance(raw, list) and len(raw) == 3, "expected [kind, subject, target]", where)
        state.suppressed.add((str(raw[0]), str(raw[1]), str(raw[2])))

    _recount_ids(state)
    return state


def _recount_ids(state: ProjectState) -> None:
    from .ontology import _bump_counter

    for table in (
        state.concepts,
        state.variables,
        state.mychoice.mcriteria,
        state.mychoice.aims,
        state.mychoice.properties,
        state.mychoice.alternatives,
    ):
        for token in table:
            _bump_counter(state, token)


def journal_from_payload(payload: list, pointer: str = "/journal") -> list[DecisionRecord]:
    _expect(isinstance(payload, list), "journal must be a list", pointer)
    journal: list[DecisionRecord] = []
    for i, raw in enumerate(payload):
        where = f"{pointer}/{i}"
        record = DecisionRecord(
            seq=int(_get(raw, "seq", int, where)),
            actor=str(_get(raw, "actor", str, where)),
            action=str(_get(raw, "action", str, where)),
            payload=_get(raw, "payload", dict, where),
            timestamp=str(_get(raw, "timestamp", str, where)),
        )
        _expect(record.seq == i + 1, f"journal seq must be gap-free, got {record.seq}", where)
        journal.append(record)
    return journal


def config_from_payload(payload: dict, pointer: str = "/config") -> ProjectConfig:
    _expect(isinstance(payload, dict), "config must be an object", pointer)
    try:
        threshold = Fraction(str(payload.get("threshold", "3/5")))
    except (ValueError, ZeroDivisionError):
        raise SchemaError("bad threshold", f"{pointer}/threshold")
    return ProjectConfig(
        threshold=threshold,
        k_max=int(payload.get("k_max", 8)),
        n_keys=int(payload.get("n_keys", 4)),
        delphi_k=int(payload.get("delphi_k", 5)),
        delphi_rounds=int(payload.get("delphi_rounds", 2)),
        stopword_languages=tuple(payload.get("stopword_languages", ("fr", "en"))),
    )


def project_from_payload(payload: dict) -> Project:
    return Project(
        corpus=corpus_from_payload(_get(payload, "corpus", dict, "")),
        state=state_from_payload(_get(payload, "state", dict, "")),
        journal=journal_from_payload(_get(payload, "journal", list, "")),
        config=config_from_payload(_get(payload, "config", dict, "")),
    )


# ---------------------------------------------------------------------------
# Migrations
# ---------------------------------------------------------------------------


def _migrate_1_to_2(payload: dict) -> dict:
    """Version 1 predates the alignment map and suggestion suppression."""
    state = payload.get("state", {})
    state.setdefault("alignment_map", empty_alignment_payload())
    state.setdefault("suppressed_suggestions", [])
    return payload


_MIGRATIONS = {1: _migrate_1_to_2}


# ---------------------------------------------------------------------------
# Save / load
# ---------------------------------------------------------------------------


def _lock_for(path) -> FileLock:
    return FileLock(str(path) + ".lock")


def save(project: Project, path, lock: bool = True) -> None:
    data = project_bytes(project)
    flock = _lock_for(path) if lock else None
    if flock:
        flock.acquire(timeout=10)
    try:
        tmp = str(path) + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    finally:
        if flock:
            flock.release()


def load(path, verify_replay: bool = True) -> Project:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise ProjectFileError(f"cannot read {path}: {exc}")
    try:
        document = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ChecksumError(f"{path}: corrupt project file, cannot parse: {exc}")
    _expect(isinstance(document, dict), "project file must hold an object", "")
    version = _get(document, "format_version", int, "")
    if version > FORMAT_VERSION:
        raise VersionError(
            f"{path}: format version {version} is newer than supported {FORMAT_VERSION}"
        )
    payload = _get(document, "payload", dict, "")
    stored_checksum = _get(document, "checksum", str, "")
    if _checksum(payload) != stored_checksum:
        raise ChecksumError(f"{path}: checksum mismatch, file is corrupt or was edited")
    while version < FORMAT_VERSION:
        payload = _MIGRATIONS[version](payload)
        version += 1
    project = project_from_payload(payload)
    if verify_replay:
        if state_bytes(replay(project.journal)) != state_bytes(project.state):
            raise ProjectFileError(
                f"{path}: journal replay does not reproduce the stored state"
            )
    return project
