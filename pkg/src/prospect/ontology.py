"""Both ontology schemas and the append-only decision journal.

Everything derived (concepts, variables, the argumentation side, relations,
ballots, the alignment map, suppressed suggestion pairs) is a pure function
of the journal: replaying the records from an empty state reproduces the
current state exactly. Operations validate first, then commit one record;
the reducer that applies records never validates, so replay cannot diverge
from the live state.
"""

from __future__ import annotations

import datetime as _dt
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .corpus import Corpus, normalize
from .delphi import DelphiBallot
from .errors import DuplicateIdError, UnknownIdError, ValidationError
from .structural import InfluenceRelation

EVALUATIONS = ("positive", "negative")

SUGGESTION_KINDS = ("criterion_to_concept", "concept_merge")


# ---------------------------------------------------------------------------
# Schema types
# ---------------------------------------------------------------------------


@dataclass
class Modality:
    label: str
    variable_id: str


@dataclass
class Variable:
    id: str
    label: str
    modalities: list[Modality] = field(default_factory=list)
    is_key: bool = False  # transient, set by key-variable selection

    def modality_labels(self) -> list[str]:
        return [m.label for m in self.modalities]


@dataclass
class Concept:
    id: str
    label: str
    criterion_ids: set[str] = field(default_factory=set)
    variable_ids: set[str] = field(default_factory=set)
    # labels absorbed from merged concepts; they stay in the matching
    # registry so later suggestions can still hit the old wording
    extra_labels: set[str] = field(default_factory=set)

    def registered_texts(self, corpus: Corpus) -> list[str]:
        """Normalized label registry used for similarity scoring."""
        texts = {normalize(self.label)}
        texts.update(normalize(extra) for extra in self.extra_labels)
        for cid in self.criterion_ids:
            criterion = corpus.criteria.get(cid)
            if criterion is not None:
                texts.add(criterion.normalized_text)
        return sorted(t for t in texts if t)


@dataclass
class MCriterion:
    id: str
    label: str


@dataclass
class Aim:
    id: str
    label: str
    mcriterion_id: str  # exactly one parent, never zero, never two


@dataclass
class PropertyInstance:
    id: str
    denomination: str
    value: str
    evaluation: str  # "positive" | "negative"
    aim_id: str
    stakeholder_id: str
    weight: Fraction = Fraction(1)


@dataclass
class Alternative:
    id: str
    label: str


@dataclass
class MyChoiceDataset:
    """The argumentation-side schema: criteria > aims > properties."""

    mcriteria: dict[str, MCriterion] = field(default_factory=dict)
    aims: dict[str, Aim] = field(default_factory=dict)
    properties: dict[str, PropertyInstance] = field(default_factory=dict)
    alternatives: dict[str, Alternative] = field(default_factory=dict)

    def property_groups(self) -> dict[tuple[str, str], list[PropertyInstance]]:
        """Instances grouped by (aim, denomination): one group = one property."""
        groups: dict[tuple[str, str], list[PropertyInstance]] = {}
        for prop in self.properties.values():
            groups.setdefault((prop.aim_id, prop.denomination), []).append(prop)
        return groups


def empty_alignment_payload() -> dict:
    return {
        "mcriterion_to_variable": {},
        "parent_resolutions": {},
        "concept_aim_links": [],
        "variable_labels": {},
    }


# ---------------------------------------------------------------------------
# Journal
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecisionRecord:
    seq: int
    actor: str
    action: str
    payload: dict
    timestamp: str  # ISO-8601


@dataclass
class ProjectState:
    concepts: dict[str, Concept] = field(default_factory=dict)
    variables: dict[str, Variable] = field(default_factory=dict)
    mychoice: MyChoiceDataset = field(default_factory=MyChoiceDataset)
    relations: list[InfluenceRelation] = field(default_factory=list)
    ballots: list[DelphiBallot] = field(default_factory=list)
    alignment_map: dict = field(default_factory=empty_alignment_payload)
    suppressed: set[tuple[str, str, str]] = field(default_factory=set)
    criterion_assignment: dict[str, str] = field(default_factory=dict)
    id_counters: dict[str, int] = field(default_factory=dict)


_ID_RE = re.compile(r"^(.*?)(\d+)$")


def _bump_counter(state: ProjectState, token: str) -> None:
    m = _ID_RE.match(token)
    if m:
        prefix, num = m.group(1), int(m.group(2))
        if num > state.id_counters.get(prefix, 0):
            state.id_counters[prefix] = num


def new_id(state: ProjectState, prefix: str, taken=()) -> str:
    n = state.id_counters.get(prefix, 0) + 1
    while f"{prefix}{n}" in taken:
        n += 1
    return f"{prefix}{n}"


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# Reducer: applies one already-validated record to the state.


def _apply_create_concept(state: ProjectState, p: dict) -> None:
    state.concepts[p["id"]] = Concept(id=p["id"], label=p["label"])
    _bump_counter(state, p["id"])


def _apply_assign_criterion(state: ProjectState, p: dict) -> None:
    cid, target = p["criterion_id"], p["concept_id"]
    previous = state.criterion_assignment.get(cid)
    if previous is not None and previous in state.concepts:
        state.concepts[previous].criterion_ids.discard(cid)
    state.concepts[target].criterion_ids.add(cid)
    state.criterion_assignment[cid] = target


def _apply_merge_concepts(state: ProjectState, p: dict) -> None:
    survivor = state.concepts[p["a"]]
    absorbed = state.concepts.pop(p["b"])
    survivor.criterion_ids |= absorbed.criterion_ids
    survivor.variable_ids |= absorbed.variable_ids
    survivor.extra_labels |= absorbed.extra_labels
    survivor.extra_labels.add(absorbed.label)
    if survivor.label != p["keep_label"]:
        survivor.extra_labels.add(survivor.label)
        survivor.label = p["keep_label"]
    survivor.extra_labels.discard(survivor.label)
    for cid in absorbed.criterion_ids:
        state.criterion_assignment[cid] = survivor.id
    # relations follow the surviving concept; pairs collapsing to a
    # self-loop are dropped
    remapped: list[InfluenceRelation] = []
    for rel in state.relations:
        src = survivor.id if rel.from_concept == absorbed.id else rel.from_concept
        dst = survivor.id if rel.to_concept == absorbed.id else rel.to_concept
        if src == dst:
            continue
        if (src, dst) != (rel.from_concept, rel.to_concept):
            rel = InfluenceRelation(src, dst, rel.weight, rel.source_id)
        remapped.append(rel)
    state.relations = remapped
    resolutions = state.alignment_map.get("parent_resolutions", {})
    resolutions.pop(absorbed.id, None)


def _apply_attach_variable(state: ProjectState, p: dict) -> None:
    state.concepts[p["concept_id"]].variable_ids.add(p["variable_id"])


def _apply_define_modality(state: ProjectState, p: dict) -> None:
    variable = state.variables[p["variable_id"]]
    variable.modalities.append(Modality(label=p["label"], variable_id=variable.id))


def _apply_create_variable(state: ProjectState, p: dict) -> None:
    state.variables[p["id"]] = Variable(id=p["id"], label=p["label"])
    _bump_counter(state, p["id"])


def _apply_create_mcriterion(state: ProjectState, p: dict) -> None:
    state.mychoice.mcriteria[p["id"]] = MCriterion(id=p["id"], label=p["label"])
    _bump_counter(state, p["id"])


def _apply_create_aim(state: ProjectState, p: dict) -> None:
    state.mychoice.aims[p["id"]] = Aim(
        id=p["id"], label=p["label"], mcriterion_id=p["mcriterion_id"]
    )
    _bump_counter(state, p["id"])


def _apply_add_property(state: ProjectState, p: dict) -> None:
    state.mychoice.properties[p["id"]] = PropertyInstance(
        id=p["id"],
        denomination=p["denomination"],
        value=p["value"],
        evaluation=p["evaluation"],
        aim_id=p["aim_id"],
        stakeholder_id=p["stakeholder_id"],
        weight=Fraction(p["weight"]),
    )
    _bump_counter(state, p["id"])


def _apply_create_alternative(state: ProjectState, p: dict) -> None:
    state.mychoice.alternatives[p["id"]] = Alternative(id=p["id"], label=p["label"])
    _bump_counter(state, p["id"])


def _apply_accept_suggestion(state: ProjectState, p: dict) -> None:
    if p["kind"] == "criterion_to_concept":
        _apply_assign_criterion(
            state, {"criterion_id": p["subject_id"], "concept_id": p["target_id"]}
        )
    else:
        _apply_merge_concepts(
            state, {"a": p["target_id"], "b": p["subject_id"], "keep_label": p["keep_label"]}
        )


def _apply_reject_suggestion(state: ProjectState, p: dict) -> None:
    state.suppressed.add((p["kind"], p["subject_id"], p["target_id"]))


def _apply_set_alignment(state: ProjectState, p: dict) -> None:
    base = empty_alignment_payload()
    base.update(p["map"])
    state.alignment_map = base


def _apply_set_parent_resolution(state: ProjectState, p: dict) -> None:
    state.alignment_map.setdefault("parent_resolutions", {})[p["concept_id"]] = p["variable_id"]


def _apply_add_relation(state: ProjectState, p: dict) -> None:
    state.relations.append(
        InfluenceRelation(
            from_concept=p["from_concept"],
            to_concept=p["to_concept"],
            weight=p["weight"],
            source_id=p["source_id"],
        )
    )


def _apply_submit_ballot(state: ProjectState, p: dict) -> None:
    state.ballots.append(
        DelphiBallot(
            respondent_id=p["respondent_id"],
            round=p["round"],
            chosen_variable_ids=frozenset(p["chosen_variable_ids"]),
        )
    )


ACTION_HANDLERS = {
    "create_concept": _apply_create_concept,
    "assign_criterion": _apply_assign_criterion,
    "merge_concepts": _apply_merge_concepts,
    "attach_variable": _apply_attach_variable,
    "define_modality": _apply_define_modality,
    "create_variable": _apply_create_variable,
    "create_mcriterion": _apply_create_mcriterion,
    "create_aim": _apply_create_aim,
    "add_property": _apply_add_property,
    "create_alternative": _apply_create_alternative,
    "accept_suggestion": _apply_accept_suggestion,
    "reject_suggestion": _apply_reject_suggestion,
    "set_alignment": _apply_set_alignment,
    "set_parent_resolution": _apply_set_parent_resolution,
    "add_relation": _apply_add_relation,
    "submit_ballot": _apply_submit_ballot,
}


def apply_record(state: ProjectState, record: DecisionRecord) -> None:
    handler = ACTION_HANDLERS.get(record.action)
    if handler is None:
        raise ValidationError(f"journal record {record.seq}: unknown action {record.action!r}")
    handler(state, record.payload)


def replay(journal: list[DecisionRecord]) -> ProjectState:
    """Rebuild the state by folding every record over the empty state."""
    state = ProjectState()
    for record in journal:
        apply_record(state, record)
    return state


# ---------------------------------------------------------------------------
# Project aggregate
# ---------------------------------------------------------------------------


@dataclass
class ProjectConfig:
    threshold: Fraction = Fraction(3, 5)
    k_max: int = 8
    n_keys: int = 4
    delphi_k: int = 5
    delphi_rounds: int = 2
    stopword_languages: tuple[str, ...] = ("fr", "en")


@dataclass
class Project:
    corpus: Corpus = field(default_factory=Corpus)
    state: ProjectState = field(default_factory=ProjectState)
    journal: list[DecisionRecord] = field(default_factory=list)
    config: ProjectConfig = field(default_factory=ProjectConfig)

    @property
    def seq(self) -> int:
        return len(self.journal)

    def commit(self, action: str, payload: dict, actor: str = "facilitator",
               timestamp: str | None = None) -> int:
        record = DecisionRecord(
            seq=len(self.journal) + 1,
            actor=actor,
            action=action,
            payload=payload,
            timestamp=timestamp or _now(),
        )
        apply_record(self.state, record)
        self.journal.append(record)
        return record.seq

    def replayed_state(self) -> ProjectState:
        return replay(self.journal)


def new_project(config: ProjectConfig | None = None) -> Project:
    return Project(config=config or ProjectConfig())


# ---------------------------------------------------------------------------
# Edit operations (validate, then commit exactly one record)
# ---------------------------------------------------------------------------


def _require(condition: bool, message: str, error=ValidationError) -> None:
    if not condition:
        raise error(message)


def create_concept(project: Project, label: str, concept_id: str | None = None,
                   actor: str = "facilitator", timestamp: str | None = None) -> str:
    _require(bool(label), "concept label must be non-empty")
    cid = concept_id or new_id(project.state, "con", project.state.concepts)
    _require(cid not in project.state.concepts, f"duplicate concept id {cid!r}", DuplicateIdError)
    project.commit("create_concept", {"id": cid, "label": label}, actor, timestamp)
    return cid


def create_variable(project: Project, label: str, variable_id: str | None = None,
                    actor: str = "facilitator", timestamp: str | None = None) -> str:
    _require(bool(label), "variable label must be non-empty")
    vid = variable_id or new_id(project.state, "var", project.state.variables)
    _require(vid not in project.state.variables, f"duplicate variable id {vid!r}", DuplicateIdError)
    project.commit("create_variable", {"id": vid, "label": label}, actor, timestamp)
    return vid


def assign_criterion(project: Project, criterion_id: str, concept_id: str,
                     actor: str = "facilitator", timestamp: str | None = None) -> None:
    _require(criterion_id in project.corpus.criteria,
             f"unknown criterion {criterion_id!r}", UnknownIdError)
    _require(concept_id in project.state.concepts,
             f"unknown concept {concept_id!r}", UnknownIdError)
    previous = project.state.criterion_assignment.get(criterion_id)
    project.commit(
        "assign_criterion",
        {"criterion_id": criterion_id, "concept_id": concept_id, "previous_concept_id": previous},
        actor,
        timestamp,
    )


def merge_concepts(project: Project, a: str, b: str, keep_label: str | None = None,
                   actor: str = "facilitator", timestamp: str | None = None) -> str:
    _require(a != b, f"cannot merge concept {a!r} with itself")
    _require(a in project.state.concepts, f"unknown concept {a!r}", UnknownIdError)
    _require(b in project.state.concepts, f"unknown concept {b!r}", UnknownIdError)
    label = keep_label or project.state.concepts[a].label
    project.commit("merge_concepts", {"a": a, "b": b, "keep_label": label}, actor, timestamp)
    return a


def attach_variable(project: Project, concept_id: str, variable_id: str,
                    actor: str = "facilitator", timestamp: str | None = None) -> None:
    _require(concept_id in project.state.concepts,
             f"unknown concept {concept_id!r}", UnknownIdError)
    _require(variable_id in project.state.variables,
             f"unknown variable {variable_id!r}", UnknownIdError)
    project.commit(
        "attach_variable", {"concept_id": concept_id, "variable_id": variable_id}, actor, timestamp
    )


def define_modality(project: Project, variable_id: str, label: str,
                    actor: str = "facilitator", timestamp: str | None = None) -> None:
    _require(bool(label), "modality label must be non-empty")
    variable = project.state.variables.get(variable_id)
    _require(variable is not None, f"unknown variable {variable_id!r}", UnknownIdError)
    _require(label not in variable.modality_labels(),
             f"variable {variable_id!r} already has modality {label!r}", DuplicateIdError)
    project.commit("define_modality", {"variable_id": variable_id, "label": label},
                   actor, timestamp)


def create_mcriterion(project: Project, label: str, mcriterion_id: str | None = None,
                      actor: str = "facilitator", timestamp: str | None = None) -> str:
    _require(bool(label), "criterion label must be non-empty")
    existing = {m.label for m in project.state.mychoice.mcriteria.values()}
    _require(label not in existing, f"duplicate criterion label {label!r}", DuplicateIdError)
    mid = mcriterion_id or new_id(project.state, "mc", project.state.mychoice.mcriteria)
    _require(mid not in project.state.mychoice.mcriteria,
             f"duplicate criterion id {mid!r}", DuplicateIdError)
    project.commit("create_mcriterion", {"id": mid, "label": label}, actor, timestamp)
    return mid


def create_aim(project: Project, label: str, mcriterion_id: str, aim_id: str | None = None,
               actor: str = "facilitator", timestamp: str | None = None) -> str:
    _require(bool(label), "aim label must be non-empty")
    _require(mcriterion_id in project.state.mychoice.mcriteria,
             f"unknown criterion {mcriterion_id!r}", UnknownIdError)
    aid = aim_id or new_id(project.state, "aim", project.state.mychoice.aims)
    _require(aid not in project.state.mychoice.aims,
             f"duplicate aim id {aid!r}", DuplicateIdError)
    project.commit("create_aim", {"id": aid, "label": label, "mcriterion_id": mcriterion_id},
                   actor, timestamp)
    return aid


def add_property(project: Project, denomination: str, value: str, evaluation: str,
                 aim_id: str, stakeholder_id: str, weight: Fraction | int = 1,
                 property_id: str | None = None, actor: str = "facilitator",
                 timestamp: str | None = None) -> str:
    _require(bool(denomination), "property denomination must be non-empty")
    _require(evaluation in EVALUATIONS,
             f"evaluation must be one of {EVALUATIONS}, got {evaluation!r}")
    _require(aim_id in project.state.mychoice.aims, f"unknown aim {aim_id!r}", UnknownIdError)
    _require(stakeholder_id in project.corpus.sources,
             f"unknown stakeholder source {stakeholder_id!r}", UnknownIdError)
    weight = Fraction(weight)
    _require(weight > 0, f"property weight must be positive, got {weight}")
    key = (denomination, value, evaluation, stakeholder_id)
    for prop in project.state.mychoice.properties.values():
        if prop.aim_id == aim_id and (
            prop.denomination, prop.value, prop.evaluation, prop.stakeholder_id
        ) == key:
            raise DuplicateIdError(
                f"property {key!r} already recorded for aim {aim_id!r}"
            )
    pid = property_id or new_id(project.state, "prop", project.state.mychoice.properties)
    _require(pid not in project.state.mychoice.properties,
             f"duplicate property id {pid!r}", DuplicateIdError)
    project.commit(
        "add_property",
        {
            "id": pid,
            "denomination": denomination,
            "value": value,
            "evaluation": evaluation,
            "aim_id": aim_id,
            "stakeholder_id": stakeholder_id,
            "weight": str(weight),
        },
        actor,
        timestamp,
    )
    return pid


def create_alternative(project: Project, label: str, alternative_id: str | None = None,
                       actor: str = "facilitator", timestamp: str | None = None) -> str:
    _require(bool(label), "alternative label must be non-empty")
    aid = alternative_id or new_id(project.state, "alt", project.state.mychoice.alternatives)
    _require(aid not in project.state.mychoice.alternatives,
             f"duplicate alternative id {aid!r}", DuplicateIdError)
    project.commit("create_alternative", {"id": aid, "label": label}, actor, timestamp)
    return aid


def set_parent_resolution(project: Project, concept_id: str, variable_id: str,
                          actor: str = "facilitator", timestamp: str | None = None) -> None:
    concept = project.state.concepts.get(concept_id)
    _require(concept is not None, f"unknown concept {concept_id!r}", UnknownIdError)
    _require(variable_id in concept.variable_ids,
             f"variable {variable_id!r} is not a parent of concept {concept_id!r}")
    project.commit("set_parent_resolution",
                   {"concept_id": concept_id, "variable_id": variable_id}, actor, timestamp)


def set_alignment(project: Project, map_payload: dict, actor: str = "facilitator",
                  timestamp: str | None = None) -> None:
    project.commit("set_alignment", {"map": map_payload}, actor, timestamp)


def add_relation(project: Project, from_concept: str, to_concept: str, weight: int,
                 source_id: str, actor: str = "facilitator",
                 timestamp: str | None = None) -> None:
    _require(from_concept in project.state.concepts,
             f"unknown concept {from_concept!r}", UnknownIdError)
    _require(to_concept in project.state.concepts,
             f"unknown concept {to_concept!r}", UnknownIdError)
    _require(source_id in project.corpus.sources,
             f"unknown source {source_id!r}", UnknownIdError)
    # constructor enforces the self-loop and weight-range rules
    InfluenceRelation(from_concept, to_concept, weight, source_id)
    project.commit(
        "add_relation",
        {"from_concept": from_concept, "to_concept": to_concept,
         "weight": weight, "source_id": source_id},
        actor,
        timestamp,
    )


# ---------------------------------------------------------------------------
# Summary statistics
# ---------------------------------------------------------------------------


@dataclass
class SideStats:
    criteria: int
    concepts: int
    variables: int
    mean_criteria_per_concept: Fraction
    max_criteria_per_concept: int
    mean_variables_per_concept: Fraction
    max_variables_per_concept: int


@dataclass
class OntologyStats:
    godet: SideStats
    mychoice: SideStats


def _side_stats(criteria: int, per_concept_criteria: list[int],
                per_concept_variables: list[int], variables: int) -> SideStats:
    n = len(per_concept_criteria)
    return SideStats(
        criteria=criteria,
        concepts=n,
        variables=variables,
        mean_criteria_per_concept=Fraction(sum(per_concept_criteria), n) if n else Fraction(0),
        max_criteria_per_concept=max(per_concept_criteria, default=0),
        mean_variables_per_concept=Fraction(sum(per_concept_variables), n) if n else Fraction(0),
        max_variables_per_concept=max(per_concept_variables, default=0),
    )


def stats(project: Project) -> OntologyStats:
    """Counts and concept-size shape for both schema sides.

    On the argumentation side a "criterion" is one property, i.e. a distinct
    (aim, denomination) group; a multi-valued property counts once.
    """
    state = project.state
    godet = _side_stats(
        criteria=len(project.corpus.criteria),
        per_concept_criteria=[len(c.criterion_ids) for c in state.concepts.values()],
        per_concept_variables=[len(c.variable_ids) for c in state.concepts.values()],
        variables=len(state.variables),
    )
    groups = state.mychoice.property_groups()
    per_aim_groups = {aid: 0 for aid in state.mychoice.aims}
    for (aim_id, _), _instances in groups.items():
        if aim_id in per_aim_groups:
            per_aim_groups[aim_id] += 1
    mychoice = _side_stats(
        criteria=len(groups),
        per_concept_criteria=list(per_aim_groups.values()),
        per_concept_variables=[1] * len(state.mychoice.aims),
        variables=len(state.mychoice.mcriteria),
    )
    return OntologyStats(godet=godet, mychoice=mychoice)
