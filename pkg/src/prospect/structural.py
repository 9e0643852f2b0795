"""Influence/dependence relations, the variable-level matrix and key-variable ranking.

Relations are recorded between concepts. They are lifted to a square
variable-by-variable matrix D through concept-to-variable memberships, then
direct and indirect influence is read off successive integer powers of D.
All arithmetic is exact integer arithmetic, so results are reproducible
bit for bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from .errors import ValidationError

if TYPE_CHECKING:  # pragma: no cover
    from .ontology import ProjectState

RELATION_WEIGHTS = (1, 2, 3)
QUADRANTS = ("driver", "relay", "dependent", "autonomous")

DEFAULT_K_MAX = 8
DEFAULT_N_KEYS = 4


@dataclass(frozen=True)
class InfluenceRelation:
    """A directed concept-to-concept influence read out of one source."""

    from_concept: str
    to_concept: str
    weight: int
    source_id: str

    def __post_init__(self):
        if self.from_concept == self.to_concept:
            raise ValidationError(f"relation cannot be a self-loop on {self.from_concept!r}")
        if self.weight not in RELATION_WEIGHTS:
            raise ValidationError(
                f"relation weight must be in {RELATION_WEIGHTS}, got {self.weight}"
            )


@dataclass
class InfluenceMatrix:
    variable_ids: list[str]
    labels: dict[str, str]
    rows: list[list[int]]  # rows[i][j]: summed weight of variable i influencing j

    @property
    def size(self) -> int:
        return len(self.variable_ids)

    def label(self, variable_id: str) -> str:
        return self.labels.get(variable_id, variable_id)


@dataclass
class VariableScore:
    variable_id: str
    label: str
    influence: int
    dependence: int
    quadrant: str
    is_key: bool = False


@dataclass
class StructuralScores:
    scores: list[VariableScore]
    k_used: int
    converged: bool
    influence_median: Fraction = Fraction(0)
    dependence_median: Fraction = Fraction(0)

    def by_id(self) -> dict[str, VariableScore]:
        return {s.variable_id: s for s in self.scores}


def build_matrix(state: "ProjectState", relations: list[InfluenceRelation] | None = None) -> InfluenceMatrix:
    """Lift concept relations to the variable-by-variable matrix.

    Each relation contributes its weight once per (from-variable, to-variable)
    pair drawn from the two concepts' memberships; projections onto a single
    variable (i == j) are dropped, so the diagonal stays zero.
    """
    if relations is None:
        relations = state.relations
    variable_ids = sorted(state.variables)
    index = {vid: i for i, vid in enumerate(variable_ids)}
    labels = {vid: state.variables[vid].label for vid in variable_ids}
    rows = [[0] * len(variable_ids) for _ in variable_ids]

    offenders: list[str] = []
    for rel in relations:
        for endpoint in (rel.from_concept, rel.to_concept):
            concept = state.concepts.get(endpoint)
            if concept is None or not concept.variable_ids:
                offenders.append(endpoint)
    if offenders:
        raise ValidationError(
            "relation endpoints without variable membership: "
            + ", ".join(sorted(set(offenders)))
        )

    for rel in relations:
        from_vars = sorted(state.concepts[rel.from_concept].variable_ids)
        to_vars = sorted(state.concepts[rel.to_concept].variable_ids)
        for vi in from_vars:
            for vj in to_vars:
                if vi != vj:
                    rows[index[vi]][index[vj]] += rel.weight
    return InfluenceMatrix(variable_ids=variable_ids, labels=labels, rows=rows)


def _mat_mul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    n = len(a)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for k in range(n):
            aik = ai[k]
            if aik:
                bk = b[k]
                for j in range(n):
                    oi[j] += aik * bk[j]
    return out


def _is_zero(m: list[list[int]]) -> bool:
    return all(v == 0 for row in m for v in row)


def _row_sums(m: list[list[int]]) -> list[int]:
    return [sum(row) for row in m]


def _col_sums(m: list[list[int]]) -> list[int]:
    return [sum(row[j] for row in m) for j in range(len(m))]


def _rank_order(sums: list[int]) -> tuple[int, ...]:
    """Competition ranks, ties sharing a rank."""
    return tuple(1 + sum(1 for other in sums if other > s) for s in sums)


def _median(values: list[int]) -> Fraction:
    if not values:
        return Fraction(0)
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return Fraction(ordered[mid])
    return Fraction(ordered[mid - 1] + ordered[mid], 2)


def micmac(matrix: InfluenceMatrix, k_max: int = DEFAULT_K_MAX,
           influence_split: Fraction | None = None,
           dependence_split: Fraction | None = None) -> StructuralScores:
    """Rank variables by direct plus indirect influence.

    Successive powers D, D^2, ... are computed until the ranking of row sums
    and of column sums stops changing between consecutive powers, or until a
    power vanishes (no longer paths exist, so the order is frozen), or until
    ``k_max``. Scores are reported at the stabilized power; hitting ``k_max``
    without stabilizing is flagged as non-convergence.

    Quadrants split at the medians by default; pass ``influence_split`` or
    ``dependence_split`` to override either axis.
    """
    if k_max < 1:
        raise ValidationError(f"k_max must be >= 1, got {k_max}")
    n = len(matrix.variable_ids)
    if len(matrix.rows) != n or any(len(row) != n for row in matrix.rows):
        raise ValidationError("influence matrix must be square")
    if n == 0:
        return StructuralScores(scores=[], k_used=1, converged=True)

    power = [row[:] for row in matrix.rows]
    k = 1
    converged = False
    while True:
        if _is_zero(power):
            converged = True
            break
        if k == k_max:
            break
        nxt = _mat_mul(power, matrix.rows)
        if _is_zero(nxt):
            converged = True
            break
        if _rank_order(_row_sums(power)) == _rank_order(_row_sums(nxt)) and _rank_order(
            _col_sums(power)
        ) == _rank_order(_col_sums(nxt)):
            converged = True
            break
        power = nxt
        k += 1

    influence = _row_sums(power)
    dependence = _col_sums(power)
    med_inf = _median(influence) if influence_split is None else Fraction(influence_split)
    med_dep = _median(dependence) if dependence_split is None else Fraction(dependence_split)
    scores = []
    for i, vid in enumerate(matrix.variable_ids):
        above_inf = influence[i] > med_inf
        above_dep = dependence[i] > med_dep
        if above_inf and above_dep:
            quadrant = "relay"
        elif above_inf:
            quadrant = "driver"
        elif above_dep:
            quadrant = "dependent"
        else:
            quadrant = "autonomous"
        scores.append(
            VariableScore(
                variable_id=vid,
                label=matrix.label(vid),
                influence=influence[i],
                dependence=dependence[i],
                quadrant=quadrant,
            )
        )
    return StructuralScores(
        scores=scores,
        k_used=k,
        converged=converged,
        influence_median=med_inf,
        dependence_median=med_dep,
    )


def key_variables(scores: StructuralScores, n_keys: int = DEFAULT_N_KEYS) -> list[VariableScore]:
    """Select the top variables by total involvement.

    Ranked by influence + dependence descending, ties by influence descending
    then label ascending. Marks ``is_key`` on the returned scores.
    """
    if n_keys > len(scores.scores):
        raise ValidationError(
            f"n_keys={n_keys} exceeds variable count {len(scores.scores)}"
        )
    ordered = sorted(
        scores.scores,
        key=lambda s: (-(s.influence + s.dependence), -s.influence, s.label, s.variable_id),
    )
    selected = ordered[:n_keys]
    chosen = {s.variable_id for s in selected}
    for s in scores.scores:
        s.is_key = s.variable_id in chosen
    return selected


def write_matrix_csv(matrix: InfluenceMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["variable"] + [matrix.label(v) for v in matrix.variable_ids])
        for vid, row in zip(matrix.variable_ids, matrix.rows):
            writer.writerow([matrix.label(vid)] + row)


def read_matrix_csv(path) -> InfluenceMatrix:
    """Read a matrix CSV whose header row carries the variable labels."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty matrix file")
        labels = [h.strip() for h in header[1:]]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(labels) + 1:
                raise ValidationError(f"{path}:{lineno}: expected {len(labels) + 1} cells")
            try:
                rows.append([int(v) for v in row[1:]])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: matrix entries must be integers")
    if len(rows) != len(labels):
        raise ValidationError(f"{path}: matrix must be square")
    return InfluenceMatrix(
        variable_ids=list(labels), labels={l: l for l in labels}, rows=rows
    )
