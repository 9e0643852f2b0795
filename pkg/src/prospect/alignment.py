"""Conversions between the two schemas and the criterion/variable mapping.

The two sides differ structurally in exactly two ways: a property keeps
several (value, evaluation) pairs under one denomination while the other
side records one criterion per pair, and an aim has exactly one parent
criterion while a concept may sit under several variables. Conversions
honor both rules; a multi-parent concept is only converted once a
facilitator has recorded which parent wins, and the dropped memberships
are the known, reportable loss.

Criterion texts carry the dissection inline as ``denomination=value(+)`` or
``denomination=value(-)``; a plain phrase is treated as a valueless positive
property and survives both directions unchanged.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConversionError, SchemaError
from .ontology import (
    Aim,
    Alternative,
    Concept,
    MCriterion,
    Modality,
    MyChoiceDataset,
    OntologyStats,
    Project,
    PropertyInstance,
    Variable,
    stats,
)

_ENCODED = re.compile(r"^(?P<denom>.+)=(?P<value>.*)\((?P<sign>[+-])\)$", re.S)


def parse_property_text(text: str) -> tuple[str, str, str]:
    """Split a criterion text into (denomination, value, evaluation)."""
    m = _ENCODED.match(text)
    if m:
        evaluation = "positive" if m.group("sign") == "+" else "negative"
        return m.group("denom"), m.group("value"), evaluation
    return text, "", "positive"


def encode_property_text(denomination: str, value: str, evaluation: str) -> str:
    if value == "" and evaluation == "positive":
        return denomination
    sign = "+" if evaluation == "positive" else "-"
    return f"{denomination}={value}({sign})"


@dataclass
class AlignmentMap:
    """Total map from argumentation-side criteria onto the variable set.

    ``parent_resolutions`` records, per multi-parent concept, the variable a
    facilitator chose for conversion. ``variable_labels`` is optional and
    only used when converting a dataset that carries no variable labels of
    its own.
    """

    mcriterion_to_variable: dict[str, str] = field(default_factory=dict)
    parent_resolutions: dict[str, str] = field(default_factory=dict)
    concept_aim_links: list[tuple[str, str]] = field(default_factory=list)
    variable_labels: dict[str, str] = field(default_factory=dict)

    def image(self) -> set[str]:
        return set(self.mcriterion_to_variable.values())

    def preimage(self, variable_id: str) -> list[str]:
        return sorted(
            m for m, v in self.mcriterion_to_variable.items() if v == variable_id
        )

    def to_payload(self) -> dict:
        return {
            "mcriterion_to_variable": dict(self.mcriterion_to_variable),
            "parent_resolutions": dict(self.parent_resolutions),
            "concept_aim_links": [list(pair) for pair in self.concept_aim_links],
            "variable_labels": dict(self.variable_labels),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "AlignmentMap":
        if not isinstance(payload, dict):
            raise SchemaError("alignment map must be a JSON object", "/")
        mapping = payload.get("mcriterion_to_variable", {})
        if not isinstance(mapping, dict):
            raise SchemaError("must be an object", "/mcriterion_to_variable")
        return cls(
            mcriterion_to_variable={str(k): str(v) for k, v in mapping.items()},
            parent_resolutions={
                str(k): str(v) for k, v in payload.get("parent_resolutions", {}).items()
            },
            concept_aim_links=[
                (str(a), str(b)) for a, b in payload.get("concept_aim_links", [])
            ],
            variable_labels={
                str(k): str(v) for k, v in payload.get("variable_labels", {}).items()
            },
        )


def load_map(path) -> AlignmentMap:
    with open(path, encoding="utf-8") as fh:
        return AlignmentMap.from_payload(json.load(fh))


def save_map(amap: AlignmentMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(amap.to_payload(), fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Fragments: the convertible slice of the variable-side ontology
# ---------------------------------------------------------------------------


@dataclass
class FragmentCriterion:
    id: str
    text: str
    source_id: str
    concept_id: str | None


@dataclass
class GodetFragment:
    variables: dict[str, Variable] = field(default_factory=dict)
    concepts: dict[str, Concept] = field(default_factory=dict)
    criteria: list[FragmentCriterion] = field(default_factory=list)


def build_godet_fragment(project: Project) -> GodetFragment:
    """Snapshot the project's variable-side ontology for conversion."""
    state = project.state
    variables = {
        vid: Variable(id=vid, label=v.label, modalities=list(v.modalities))
        for vid, v in state.variables.items()
    }
    concepts = {
        cid: Concept(
            id=cid,
            label=c.label,
            criterion_ids=set(c.criterion_ids),
            variable_ids=set(c.variable_ids),
        )
        for cid, c in state.concepts.items()
    }
    criteria = [
        FragmentCriterion(
            id=cid,
            text=criterion.raw_text,
            source_id=criterion.source_id,
            concept_id=state.criterion_assignment.get(cid),
        )
        for cid, criterion in sorted(project.corpus.criteria.items())
    ]
    return GodetFragment(variables=variables, concepts=concepts, criteria=criteria)


@dataclass
class ToMyChoiceResult:
    dataset: MyChoiceDataset
    concept_aim_links: list[tuple[str, str]]


@dataclass
class ToGodetResult:
    fragment: GodetFragment
    concept_aim_links: list[tuple[str, str]]


def _resolve_parent(concept: Concept, amap: AlignmentMap) -> str | None:
    if len(concept.variable_ids) == 1:
        return next(iter(concept.variable_ids))
    resolution = amap.parent_resolutions.get(concept.id)
    if resolution is not None and resolution in concept.variable_ids:
        return resolution
    return None


def check_surjective(amap: AlignmentMap, variable_ids) -> None:
    missing = sorted(set(variable_ids) - amap.image())
    if missing:
        raise ConversionError(
            f"map does not cover variables {missing}; conversions never invent variables",
            offenders=missing,
        )


def godet_to_mychoice(fragment: GodetFragment, amap: AlignmentMap) -> ToMyChoiceResult:
    """Convert the variable side into an argumentation-side dataset.

    Criteria of one concept that share a denomination collapse into a single
    property with several (value, evaluation) pairs. Every concept becomes an
    aim under the criterion that maps onto its resolved parent variable.
    """
    check_surjective(amap, fragment.variables)
    unresolved = sorted(
        cid for cid, c in fragment.concepts.items() if _resolve_parent(c, amap) is None
    )
    if unresolved:
        raise ConversionError(
            "concepts without a single parent variable or a recorded resolution: "
            + ", ".join(unresolved),
            offenders=unresolved,
        )

    dataset = MyChoiceDataset()
    representative: dict[str, str] = {}
    for vid in sorted(fragment.variables):
        rep = amap.preimage(vid)[0]
        representative[vid] = rep
        dataset.mcriteria[rep] = MCriterion(id=rep, label=fragment.variables[vid].label)

    links: list[tuple[str, str]] = []
    aim_of_concept: dict[str, str] = {}
    for n, cid in enumerate(sorted(fragment.concepts), start=1):
        concept = fragment.concepts[cid]
        parent = _resolve_parent(concept, amap)
        aim_id = f"aim{n}"
        dataset.aims[aim_id] = Aim(
            id=aim_id, label=concept.label, mcriterion_id=representative[parent]
        )
        aim_of_concept[cid] = aim_id
        links.append((cid, aim_id))

    counter = 0
    for criterion in sorted(fragment.criteria, key=lambda c: c.id):
        if criterion.concept_id is None or criterion.concept_id not in aim_of_concept:
            continue
        denomination, value, evaluation = parse_property_text(criterion.text)
        counter += 1
        pid = f"prop{counter}"
        dataset.properties[pid] = PropertyInstance(
            id=pid,
            denomination=denomination,
            value=value,
            evaluation=evaluation,
            aim_id=aim_of_concept[criterion.concept_id],
            stakeholder_id=criterion.source_id,
            weight=Fraction(1),
        )
    return ToMyChoiceResult(dataset=dataset, concept_aim_links=links)


def mychoice_to_godet(dataset: MyChoiceDataset, amap: AlignmentMap) -> ToGodetResult:
    """Convert an argumentation-side dataset into a variable-side fragment.

    Every (property, value, evaluation) instance becomes one distinct
    criterion; every aim becomes a concept with a single variable
    membership; criteria sharing a mapped variable combine into it.
    """
    unmapped = sorted(set(dataset.mcriteria) - set(amap.mcriterion_to_variable))
    if unmapped:
        raise ConversionError(
            f"criteria with no variable mapping: {unmapped}", offenders=unmapped
        )

    fragment = GodetFragment()
    for mid in sorted(dataset.mcriteria):
        vid = amap.mcriterion_to_variable[mid]
        if vid in fragment.variables:
            continue
        label = amap.variable_labels.get(vid)
        if label is None:
            present = [m for m in amap.preimage(vid) if m in dataset.mcriteria]
            label = dataset.mcriteria[present[0]].label if present else vid
        fragment.variables[vid] = Variable(id=vid, label=label)

    links: list[tuple[str, str]] = []
    concept_of_aim: dict[str, str] = {}
    for n, aid in enumerate(sorted(dataset.aims), start=1):
        aim = dataset.aims[aid]
        cid = f"con{n}"
        fragment.concepts[cid] = Concept(
            id=cid,
            label=aim.label,
            variable_ids={amap.mcriterion_to_variable[aim.mcriterion_id]},
        )
        concept_of_aim[aid] = cid
        links.append((cid, aid))

    for n, pid in enumerate(sorted(dataset.properties), start=1):
        prop = dataset.properties[pid]
        cid = concept_of_aim[prop.aim_id]
        crit_id = f"crit{n}"
        fragment.concepts[cid].criterion_ids.add(crit_id)
        fragment.criteria.append(
            FragmentCriterion(
                id=crit_id,
                text=encode_property_text(prop.denomination, prop.value, prop.evaluation),
                source_id=prop.stakeholder_id,
                concept_id=cid,
            )
        )
    return ToGodetResult(fragment=fragment, concept_aim_links=links)


# ---------------------------------------------------------------------------
# Exchange payloads for converted datasets and fragments
# ---------------------------------------------------------------------------


def dataset_to_payload(dataset: MyChoiceDataset) -> dict:
    return {
        "mcriteria": [
            {"id": m.id, "label": m.label} for _, m in sorted(dataset.mcriteria.items())
        ],
        "aims": [
            {"id": a.id, "label": a.label, "mcriterion_id": a.mcriterion_id}
            for _, a in sorted(dataset.aims.items())
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
            for _, p in sorted(dataset.properties.items())
        ],
        "alternatives": [
            {"id": a.id, "label": a.label}
            for _, a in sorted(dataset.alternatives.items())
        ],
    }


def dataset_from_payload(payload: dict) -> MyChoiceDataset:
    dataset = MyChoiceDataset()
    for raw in payload.get("mcriteria", []):
        dataset.mcriteria[raw["id"]] = MCriterion(id=raw["id"], label=raw["label"])
    for raw in payload.get("aims", []):
        dataset.aims[raw["id"]] = Aim(
            id=raw["id"], label=raw["label"], mcriterion_id=raw["mcriterion_id"]
        )
    for raw in payload.get("properties", []):
        dataset.properties[raw["id"]] = PropertyInstance(
            id=raw["id"],
            denomination=raw["denomination"],
            value=raw.get("value", ""),
            evaluation=raw["evaluation"],
            aim_id=raw["aim_id"],
            stakeholder_id=raw["stakeholder_id"],
            weight=Fraction(str(raw.get("weight", "1"))),
        )
    for raw in payload.get("alternatives", []):
        dataset.alternatives[raw["id"]] = Alternative(id=raw["id"], label=raw["label"])
    return dataset


def fragment_to_payload(fragment: GodetFragment) -> dict:
    return {
        "variables": [
            {"id": v.id, "label": v.label, "modalities": [m.label for m in v.modalities]}
            for _, v in sorted(fragment.variables.items())
        ],
        "concepts": [
            {
                "id": c.id,
                "label": c.label,
                "criterion_ids": sorted(c.criterion_ids),
                "variable_ids": sorted(c.variable_ids),
            }
            for _, c in sorted(fragment.concepts.items())
        ],
        "criteria": [
            {
                "id": c.id,
                "text": c.text,
                "source_id": c.source_id,
                "concept_id": c.concept_id,
            }
            for c in sorted(fragment.criteria, key=lambda c: c.id)
        ],
    }


def fragment_from_payload(payload: dict) -> GodetFragment:
    fragment = GodetFragment()
    for raw in payload.get("variables", []):
        variable = Variable(id=raw["id"], label=raw["label"])
        for label in raw.get("modalities", []):
            variable.modalities.append(Modality(label=label, variable_id=variable.id))
        fragment.variables[variable.id] = variable
    for raw in payload.get("concepts", []):
        fragment.concepts[raw["id"]] = Concept(
            id=raw["id"],
            label=raw["label"],
            criterion_ids=set(raw.get("criterion_ids", [])),
            variable_ids=set(raw.get("variable_ids", [])),
        )
    for raw in payload.get("criteria", []):
        fragment.criteria.append(
            FragmentCriterion(
                id=raw["id"],
                text=raw["text"],
                source_id=raw["source_id"],
                concept_id=raw.get("concept_id"),
            )
        )
    return fragment


# ---------------------------------------------------------------------------
# Side-by-side report
# ---------------------------------------------------------------------------


@dataclass
class MultiParentEntry:
    concept_id: str
    label: str
    variable_ids: list[str]
    resolution: str | None


@dataclass
class AlignmentReport:
    sides: OntologyStats
    unmapped_mcriteria: list[str]
    unmapped_variables: list[str]
    multi_parent_concepts: list[MultiParentEntry]
    collapsible_groups: dict[str, list[str]]  # variable -> criteria that combine into it
    unassigned_criteria: int

    @property
    def discrepancy_count(self) -> int:
        unresolved = sum(1 for e in self.multi_parent_concepts if e.resolution is None)
        return len(self.unmapped_mcriteria) + len(self.unmapped_variables) + unresolved


def alignment_report(project: Project, amap: AlignmentMap | None = None) -> AlignmentReport:
    if amap is None:
        amap = AlignmentMap.from_payload(project.state.alignment_map)
    state = project.state
    image = amap.image()
    multi_parent = [
        MultiParentEntry(
            concept_id=cid,
            label=c.label,
            variable_ids=sorted(c.variable_ids),
            resolution=amap.parent_resolutions.get(cid),
        )
        for cid, c in sorted(state.concepts.items())
        if len(c.variable_ids) > 1
    ]
    collapsible = {
        vid: group
        for vid in sorted(image)
        if len(group := amap.preimage(vid)) > 1
    }
    return AlignmentReport(
        sides=stats(project),
        unmapped_mcriteria=sorted(
            set(state.mychoice.mcriteria) - set(amap.mcriterion_to_variable)
        ),
        unmapped_variables=sorted(set(state.variables) - image),
        multi_parent_concepts=multi_parent,
        collapsible_groups=collapsible,
        unassigned_criteria=sum(
            1 for cid in project.corpus.criteria if cid not in state.criterion_assignment
        ),
    )
