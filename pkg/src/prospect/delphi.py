"""Choose-k questionnaires, ballot validation, approval counting and key confirmation.

The protocol is iterative: the ranking produced by one round is fed back as
the prior ranking of the next questionnaire. Counting is plain approval
counting; no quorum is enforced, the response rate is only reported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING

from .errors import ValidationError, VariableSetMismatchError

if TYPE_CHECKING:  # pragma: no cover
    from .ontology import Project


@dataclass(frozen=True)
class DelphiBallot:
    respondent_id: str
    round: int
    chosen_variable_ids: frozenset[str]


@dataclass
class QuestionnaireOption:
    variable_id: str
    label: str
    modalities: list[str]


@dataclass
class Questionnaire:
    round: int
    k: int
    options: list[QuestionnaireOption]
    prior_ranking: list[str] = field(default_factory=list)

    @property
    def variable_ids(self) -> frozenset[str]:
        return frozenset(o.variable_id for o in self.options)


@dataclass
class VoteResult:
    round: int
    k: int
    counts: dict[str, int]
    ranking: list[str]  # variable ids, best first
    labels: dict[str, str]
    rejected: list[tuple[str, str]]  # (respondent_id, reason)
    valid_count: int
    total_count: int

    @property
    def response_rate(self) -> Fraction:
        if self.total_count == 0:
            return Fraction(0)
        return Fraction(self.valid_count, self.total_count)


@dataclass
class ConfirmationReport:
    n: int
    confirmed: list[str]
    demotions: list[str]   # structural keys the vote pushed out of the top n
    promotions: list[str]  # vote picks that were not structural keys


def generate_questionnaire(project: "Project", k: int, round: int = 1,
                           prior_ranking: list[str] | None = None) -> Questionnaire:
    """List every identified variable and ask for exactly ``k`` picks."""
    variables = project.state.variables
    if k < 1:
        raise ValidationError(f"questionnaire needs k >= 1, got {k}")
    if k > len(variables):
        raise ValidationError(
            f"cannot ask for {k} picks out of {len(variables)} variables"
        )
    options = [
        QuestionnaireOption(
            variable_id=vid,
            label=variables[vid].label,
            modalities=variables[vid].modality_labels(),
        )
        for vid in sorted(variables)
    ]
    return Questionnaire(round=round, k=k, options=options,
                         prior_ranking=list(prior_ranking or []))


def ballot_problem(ballot: DelphiBallot, variable_ids: frozenset[str], k: int,
                   existing: list[DelphiBallot] = ()) -> str | None:
    """Return the rule a ballot breaks, or None if it is valid."""
    if len(ballot.chosen_variable_ids) != k:
        return (
            f"must choose exactly {k} of {len(variable_ids)} variables, "
            f"got {len(ballot.chosen_variable_ids)}"
        )
    unknown = ballot.chosen_variable_ids - variable_ids
    if unknown:
        return f"unknown variables {sorted(unknown)}"
    for other in existing:
        if other.respondent_id == ballot.respondent_id and other.round == ballot.round:
            return f"respondent {ballot.respondent_id!r} already voted in round {ballot.round}"
    return None


def submit_ballot(project: "Project", respondent_id: str, round: int,
                  chosen_variable_ids, k: int | None = None,
                  actor: str | None = None, timestamp: str | None = None) -> int:
    """Validate a ballot against the current variable list and journal it."""
    k = k if k is not None else project.config.delphi_k
    ballot = DelphiBallot(respondent_id=respondent_id, round=round,
                          chosen_variable_ids=frozenset(chosen_variable_ids))
    problem = ballot_problem(
        ballot, frozenset(project.state.variables), k, project.state.ballots
    )
    if problem:
        raise ValidationError(f"invalid ballot: {problem}")
    return project.commit(
        "submit_ballot",
        {
            "respondent_id": respondent_id,
            "round": round,
            "chosen_variable_ids": sorted(ballot.chosen_variable_ids),
        },
        actor or respondent_id,
        timestamp,
    )


def aggregate(ballots: list[DelphiBallot], k: int, labels: dict[str, str],
              round: int = 1) -> VoteResult:
    """Approval-count one round of ballots.

    Invalid ballots are excluded and reported with the rule they break;
    counting is anonymous, so ballot order never matters.
    """
    variable_ids = frozenset(labels)
    counts = {vid: 0 for vid in labels}
    rejected: list[tuple[str, str]] = []
    accepted: list[DelphiBallot] = []
    in_round = [b for b in ballots if b.round == round]
    for ballot in in_round:
        problem = ballot_problem(ballot, variable_ids, k, accepted)
        if problem:
            rejected.append((ballot.respondent_id, problem))
            continue
        accepted.append(ballot)
        for vid in ballot.chosen_variable_ids:
            counts[vid] += 1
    ranking = sorted(counts, key=lambda vid: (-counts[vid], labels[vid], vid))
    return VoteResult(
        round=round,
        k=k,
        counts=counts,
        ranking=ranking,
        labels=dict(labels),
        rejected=rejected,
        valid_count=len(accepted),
        total_count=len(in_round),
    )


def confirm_keys(result: VoteResult, key_ids: list[str]) -> ConfirmationReport:
    """Confront structurally selected keys with the vote ranking.

    A key is confirmed when it sits in the vote's top ``len(key_ids)``.
    Demotions and promotions always come in equal numbers.
    """
    ranked = set(result.ranking)
    missing = [k for k in key_ids if k not in ranked]
    if missing:
        raise VariableSetMismatchError(
            f"key variables not covered by the vote: {sorted(missing)}"
        )
    top = result.ranking[: len(key_ids)]
    top_set = set(top)
    keys = list(key_ids)
    key_set = set(keys)
    return ConfirmationReport(
        n=len(keys),
        confirmed=[k for k in keys if k in top_set],
        demotions=[k for k in keys if k not in top_set],
        promotions=[v for v in top if v not in key_set],
    )


def read_ballots_json(path) -> list[DelphiBallot]:
    """Read ballots from a JSON list of {respondent_id, round, chosen_variable_ids}."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ValidationError(f"{path}: ballots file must hold a JSON list")
    ballots = []
    for i, item in enumerate(raw):
        try:
            ballots.append(
                DelphiBallot(
                    respondent_id=str(item["respondent_id"]),
                    round=int(item["round"]),
                    chosen_variable_ids=frozenset(
                        str(v) for v in item["chosen_variable_ids"]
                    ),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"{path}: ballot #{i} is malformed: {exc}")
    return ballots
