"""Attitude scoring: how far an alternative meets a stakeholder's aims.

The aggregation is a pluggable strategy. The default scores an aim as the
weighted share of positive evaluations among that stakeholder's property
instances, then averages aim values per criterion and criterion values
globally, all in exact rationals inside [0, 1]. Scopes with no evidence
raise instead of inventing a number.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import NoEvidenceError, UnknownIdError, ValidationError
from .ontology import MyChoiceDataset, PropertyInstance

SCOPE_KINDS = ("global", "mcriterion", "aim")


@dataclass(frozen=True)
class Scope:
    kind: str  # "global" | "mcriterion" | "aim"
    ref: str | None = None

    def __post_init__(self):
        if self.kind not in SCOPE_KINDS:
            raise ValidationError(f"scope kind must be one of {SCOPE_KINDS}")
        if self.kind == "global" and self.ref is not None:
            raise ValidationError("global scope takes no reference")
        if self.kind != "global" and not self.ref:
            raise ValidationError(f"{self.kind} scope needs a reference id")

    @classmethod
    def parse(cls, text: str) -> "Scope":
        """Parse CLI notation: 'global', 'mcriterion:ID' or 'aim:ID'."""
        if text == "global":
            return cls("global")
        kind, sep, ref = text.partition(":")
        if not sep:
            raise ValidationError(f"bad scope {text!r}; use global, mcriterion:ID or aim:ID")
        return cls(kind, ref)

    def __str__(self) -> str:
        return self.kind if self.kind == "global" else f"{self.kind}:{self.ref}"


@dataclass(frozen=True)
class Attitude:
    stakeholder_id: str
    alternative_id: str
    scope: Scope
    value: Fraction  # within [0, 1]


AimAggregator = Callable[[list[PropertyInstance]], Fraction]


def positive_share(instances: list[PropertyInstance]) -> Fraction:
    """Weighted fraction of positive evaluations; the default aim aggregator."""
    total = sum(p.weight for p in instances)
    positive = sum(p.weight for p in instances if p.evaluation == "positive")
    return Fraction(positive, 1) / total


def _stakeholder_instances(dataset: MyChoiceDataset, stakeholder_id: str
                           ) -> dict[str, list[PropertyInstance]]:
    """Instances of one stakeholder grouped per aim, deterministic order."""
    by_aim: dict[str, list[PropertyInstance]] = {}
    for pid in sorted(dataset.properties):
        prop = dataset.properties[pid]
        if prop.stakeholder_id == stakeholder_id:
            by_aim.setdefault(prop.aim_id, []).append(prop)
    return by_aim


def attitude(dataset: MyChoiceDataset, stakeholder_id: str, alternative_id: str,
             scope: Scope, aim_aggregator: AimAggregator = positive_share) -> Attitude:
    """Degree of acceptability of the alternative, at the requested scope."""
    if alternative_id not in dataset.alternatives:
        raise UnknownIdError(f"unknown alternative {alternative_id!r}")
    by_aim = _stakeholder_instances(dataset, stakeholder_id)

    def aim_value(aim_id: str) -> Fraction:
        return aim_aggregator(by_aim[aim_id])

    def mcriterion_value(mcriterion_id: str) -> Fraction | None:
        aim_ids = [
            aid for aid in sorted(dataset.aims)
            if dataset.aims[aid].mcriterion_id == mcriterion_id and aid in by_aim
        ]
        if not aim_ids:
            return None
        values = [aim_value(aid) for aid in aim_ids]
        return sum(values) / len(values)

    if scope.kind == "aim":
        if scope.ref not in dataset.aims:
            raise UnknownIdError(f"unknown aim {scope.ref!r}")
        if scope.ref not in by_aim:
            raise NoEvidenceError(
                f"stakeholder {stakeholder_id!r} stated nothing under aim {scope.ref!r}"
            )
        value = aim_value(scope.ref)
    elif scope.kind == "mcriterion":
        if scope.ref not in dataset.mcriteria:
            raise UnknownIdError(f"unknown criterion {scope.ref!r}")
        value = mcriterion_value(scope.ref)
        if value is None:
            raise NoEvidenceError(
                f"stakeholder {stakeholder_id!r} stated nothing under criterion {scope.ref!r}"
            )
    else:
        values = [
            v for mid in sorted(dataset.mcriteria)
            if (v := mcriterion_value(mid)) is not None
        ]
        if not values:
            raise NoEvidenceError(f"stakeholder {stakeholder_id!r} stated nothing")
        value = sum(values) / len(values)

    return Attitude(
        stakeholder_id=stakeholder_id,
        alternative_id=alternative_id,
        scope=scope,
        value=value,
    )


@dataclass
class AttitudeTable:
    alternative_id: str
    stakeholder_ids: list[str]
    scopes: list[Scope]
    labels: dict[str, str]  # scope string -> display label
    cells: dict[tuple[str, str], Fraction]  # (stakeholder, scope string) -> value

    def value(self, stakeholder_id: str, scope: Scope) -> Fraction | None:
        return self.cells.get((stakeholder_id, str(scope)))


def attitude_matrix(dataset: MyChoiceDataset, alternative_id: str,
                    aim_aggregator: AimAggregator = positive_share) -> AttitudeTable:
    """All stakeholder-by-scope attitudes; cells without evidence stay absent."""
    if alternative_id not in dataset.alternatives:
        raise UnknownIdError(f"unknown alternative {alternative_id!r}")
    stakeholders = sorted({p.stakeholder_id for p in dataset.properties.values()})
    scopes = [Scope("global")]
    labels = {"global": "global"}
    for mid in sorted(dataset.mcriteria):
        scope = Scope("mcriterion", mid)
        scopes.append(scope)
        labels[str(scope)] = dataset.mcriteria[mid].label
    for aid in sorted(dataset.aims):
        scope = Scope("aim", aid)
        scopes.append(scope)
        labels[str(scope)] = dataset.aims[aid].label

    cells: dict[tuple[str, str], Fraction] = {}
    for sid in stakeholders:
        for scope in scopes:
            try:
                att = attitude(dataset, sid, alternative_id, scope, aim_aggregator)
            except NoEvidenceError:
                continue
            cells[(sid, str(scope))] = att.value
    return AttitudeTable(
        alternative_id=alternative_id,
        stakeholder_ids=stakeholders,
        scopes=scopes,
        labels=labels,
        cells=cells,
    )
