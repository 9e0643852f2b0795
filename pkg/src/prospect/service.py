"""HTTP facade over one project: snapshots, the suggestion queue, journal
mutations, ballots and attitude matrices.

Sessions are named via the X-Actor / X-Role headers; a stakeholder session
may only submit ballots and arguments. Mutations and state reads share one
process-wide lock: mutation order equals journal order, and a reader never
observes a state mid-edit. Suggestion decisions use optimistic concurrency:
the client echoes the journal seq it saw, and any mismatch is a 409.
"""

from __future__ import annotations

import base64
import json
import threading
from dataclasses import dataclass
from fractions import Fraction

from fastapi import Depends, FastAPI, Header, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import acceptability, delphi, matcher, ontology, store, structural
from .errors import (
    NoEvidenceError,
    StaleSuggestionError,
    UnknownIdError,
    ValidationError,
    WorkbenchError,
)

ROLES = ("facilitator", "stakeholder")


@dataclass
class ApiSession:
    actor: str
    role: str


def _session(
    x_actor: str | None = Header(default=None),
    x_role: str = Header(default="facilitator"),
) -> ApiSession:
    if x_role not in ROLES:
        raise ValidationError(f"role must be one of {ROLES}, got {x_role!r}")
    return ApiSession(actor=x_actor or x_role, role=x_role)


def encode_suggestion_id(kind: str, subject_id: str, target_id: str) -> str:
    raw = json.dumps([kind, subject_id, target_id]).encode("utf-8")
    return base64.urlsafe_b64encode(raw).decode("ascii").rstrip("=")


def decode_suggestion_id(token: str) -> tuple[str, str, str]:
    try:
        padded = token + "=" * (-len(token) % 4)
        kind, subject_id, target_id = json.loads(base64.urlsafe_b64decode(padded))
        return str(kind), str(subject_id), str(target_id)
    except Exception:  # noqa: BLE001
        raise ValidationError(f"malformed suggestion id {token!r}")


class SeqIn(BaseModel):
    seq: int


class BallotIn(BaseModel):
    respondent_id: str
    round: int = 1
    chosen_variable_ids: list[str]


class ArgumentIn(BaseModel):
    denomination: str
    value: str = ""
    evaluation: str
    aim_id: str
    stakeholder_id: str
    weight: str = "1"


def create_app(project: ontology.Project, project_path: str | None = None,
               ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="prospect workbench", version="0.1.0")
    # one lock for mutations AND state reads: mutations are rare and cheap,
    # and a reader must never observe the state mid-edit
    state_lock = threading.Lock()

    def persist() -> None:
        if project_path:
            store.save(project, project_path)

    @app.exception_handler(WorkbenchError)
    async def on_domain_error(_request: Request, exc: WorkbenchError):
        if isinstance(exc, StaleSuggestionError):
            status = 409
        elif isinstance(exc, (UnknownIdError, NoEvidenceError)):
            status = 422
        else:
            status = 422
        return JSONResponse(
            status_code=status,
            content={"error": {"type": type(exc).__name__, "detail": str(exc)}},
        )

    def forbid_stakeholder(session: ApiSession) -> None:
        if session.role != "facilitator":
            raise PermissionError

    @app.exception_handler(PermissionError)
    async def on_forbidden(_request: Request, _exc: PermissionError):
        return JSONResponse(
            status_code=403,
            content={"error": {"type": "RoleViolation",
                               "detail": "stakeholder sessions cannot mutate the ontology"}},
        )

    # -- read side -----------------------------------------------------

    @app.get("/ontology")
    def get_ontology():
        with state_lock:
            return {
                "journal_seq": project.seq,
                "corpus": {
                    "sources": project.corpus.source_count,
                    "interviews": project.corpus.interview_count,
                    "documents": project.corpus.document_count,
                    "criteria": len(project.corpus.criteria),
                },
                "state": store.state_to_payload(project.state),
            }

    @app.get("/journal")
    def get_journal():
        with state_lock:
            return store.journal_to_payload(project.journal)

    @app.get("/suggestions")
    def get_suggestions(threshold: str | None = None, limit: int = 20):
        value = Fraction(threshold) if threshold else None
        with state_lock:
            batch = matcher.suggest(project, threshold=value, limit=limit)
            seq = project.seq

            def source_context(s):
                criterion = project.corpus.criteria.get(s.subject_id)
                if s.kind != "criterion_to_concept" or criterion is None:
                    return None
                return {
                    "source_id": criterion.source_id,
                    "raw_text": criterion.raw_text,
                    "span": list(criterion.span) if criterion.span else None,
                }

            return {
                "journal_seq": seq,
                "suggestions": [
                    {
                        "id": encode_suggestion_id(s.kind, s.subject_id, s.target_id),
                        "kind": s.kind,
                        "subject_id": s.subject_id,
                        "subject_label": s.subject_label,
                        "target_id": s.target_id,
                        "target_label": s.target_label,
                        "score": float(s.score),
                        "rank": s.rank,
                        "source": source_context(s),
                    }
                    for s in batch
                ],
            }

    @app.get("/matrix")
    def get_matrix():
        with state_lock:
            matrix = structural.build_matrix(project.state)
        return {
            "variable_ids": matrix.variable_ids,
            "labels": matrix.labels,
            "rows": matrix.rows,
        }

    @app.get("/scores")
    def get_scores(k_max: int | None = None):
        with state_lock:
            matrix = structural.build_matrix(project.state)
        scores = structural.micmac(matrix, k_max=k_max or project.config.k_max)
        structural.key_variables(scores, n_keys=min(project.config.n_keys, len(scores.scores)))
        return json.loads(_scores_json(scores))

    @app.get("/keys")
    def get_keys(n_keys: int | None = None, k_max: int | None = None):
        with state_lock:
            matrix = structural.build_matrix(project.state)
        scores = structural.micmac(matrix, k_max=k_max or project.config.k_max)
        selected = structural.key_variables(scores, n_keys=n_keys or project.config.n_keys)
        return {
            "n_keys": n_keys or project.config.n_keys,
            "keys": [
                {"id": s.variable_id, "label": s.label, "influence": s.influence,
                 "dependence": s.dependence, "quadrant": s.quadrant}
                for s in selected
            ],
            "k_used": scores.k_used,
            "converged": scores.converged,
        }

    @app.get("/delphi/questionnaire")
    def get_questionnaire(k: int | None = None, round: int = 1):
        with state_lock:
            questionnaire = delphi.generate_questionnaire(
                project, k or project.config.delphi_k, round=round
            )
        return json.loads(_questionnaire_json(questionnaire))

    @app.get("/delphi/ranking")
    def get_ranking(round: int = 1, k: int | None = None):
        with state_lock:
            labels = {vid: v.label for vid, v in project.state.variables.items()}
            result = delphi.aggregate(
                project.state.ballots, k or project.config.delphi_k, labels, round=round
            )
        return json.loads(_votes_json(result))

    @app.get("/attitudes")
    def get_attitudes(alternative: str | None = None):
        with state_lock:
            dataset = project.state.mychoice
            if alternative is None:
                if len(dataset.alternatives) != 1:
                    raise ValidationError(
                        "pass ?alternative=ID; the project does not have exactly one alternative"
                    )
                alternative = next(iter(dataset.alternatives))
            table = acceptability.attitude_matrix(dataset, alternative)
        return json.loads(_attitudes_json(table))

    # -- write side ----------------------------------------------------

    @app.post("/suggestions/{suggestion_id}/accept")
    def accept_suggestion(suggestion_id: str, body: SeqIn,
                          session: ApiSession = Depends(_session)):
        forbid_stakeholder(session)
        kind, subject_id, target_id = decode_suggestion_id(suggestion_id)
        with state_lock:
            if body.seq != project.seq:
                raise StaleSuggestionError(
                    f"journal moved from seq {body.seq} to {project.seq}; refresh the batch"
                )
            matcher.check_applicable(project, kind, subject_id, target_id)
            payload = {"kind": kind, "subject_id": subject_id, "target_id": target_id}
            if kind == "concept_merge":
                payload["keep_label"] = project.state.concepts[target_id].label
            seq = project.commit("accept_suggestion", payload, actor=session.actor)
            persist()
        return {"seq": seq}

    @app.post("/suggestions/{suggestion_id}/reject")
    def reject_suggestion(suggestion_id: str, body: SeqIn,
                          session: ApiSession = Depends(_session)):
        forbid_stakeholder(session)
        kind, subject_id, target_id = decode_suggestion_id(suggestion_id)
        with state_lock:
            if body.seq != project.seq:
                raise StaleSuggestionError(
                    f"journal moved from seq {body.seq} to {project.seq}; refresh the batch"
                )
            seq = project.commit(
                "reject_suggestion",
                {"kind": kind, "subject_id": subject_id, "target_id": target_id},
                actor=session.actor,
            )
            persist()
        return {"seq": seq}

    @app.post("/ballots")
    def post_ballot(body: BallotIn, session: ApiSession = Depends(_session)):
        with state_lock:
            seq = delphi.submit_ballot(
                project, body.respondent_id, body.round, body.chosen_variable_ids,
                actor=session.actor,
            )
            persist()
        return {"seq": seq}

    @app.post("/arguments")
    def post_argument(body: ArgumentIn, session: ApiSession = Depends(_session)):
        with state_lock:
            ontology.add_property(
                project,
                denomination=body.denomination,
                value=body.value,
                evaluation=body.evaluation,
                aim_id=body.aim_id,
                stakeholder_id=body.stakeholder_id,
                weight=Fraction(body.weight),
                actor=session.actor,
            )
            persist()
            return {"seq": project.seq}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


# report helpers are imported lazily so that matplotlib stays out of the
# service worker unless figures are actually requested elsewhere
def _scores_json(scores) -> str:
    from .report import scores_json

    return scores_json(scores)


def _votes_json(result) -> str:
    from .report import votes_json

    return votes_json(result)


def _questionnaire_json(questionnaire) -> str:
    from .report import questionnaire_json

    return questionnaire_json(questionnaire)


def _attitudes_json(table) -> str:
    from .report import attitude_json

    return attitude_json(table)
