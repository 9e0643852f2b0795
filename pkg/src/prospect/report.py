"""Delimited exports and figure rendering for the reporting commands.

Every report has a data form (CSV or JSON, deterministic bytes) and most
have a figure form written next to it: the influence/dependence quadrant
scatter, the attitude heatmap, the ballot bar chart and the side-by-side
alignment counts.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .acceptability import AttitudeTable
from .alignment import AlignmentReport
from .delphi import Questionnaire, VoteResult
from .ontology import OntologyStats
from .structural import StructuralScores


def fmt(value) -> str:
    if isinstance(value, Fraction):
        return f"{float(value):.4f}"
    return str(value)


def jsonable(value):
    if isinstance(value, Fraction):
        return float(value)
    return value


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def csv_text(rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Ontology statistics
# ---------------------------------------------------------------------------


def stats_rows(summary: OntologyStats) -> list[list]:
    header = [
        "side", "criteria", "concepts", "variables",
        "mean_criteria_per_concept", "max_criteria_per_concept",
        "mean_variables_per_concept", "max_variables_per_concept",
    ]
    rows = [header]
    for side_name, side in (("godet", summary.godet), ("mychoice", summary.mychoice)):
        rows.append([
            side_name, side.criteria, side.concepts, side.variables,
            fmt(side.mean_criteria_per_concept), side.max_criteria_per_concept,
            fmt(side.mean_variables_per_concept), side.max_variables_per_concept,
        ])
    return rows


def stats_text(summary: OntologyStats) -> str:
    lines = []
    for side_name, side in (("godet", summary.godet), ("mychoice", summary.mychoice)):
        lines.append(
            f"{side_name}: criteria={side.criteria} concepts={side.concepts} "
            f"variables={side.variables} "
            f"mean-criteria-per-concept={fmt(side.mean_criteria_per_concept)} "
            f"max-criteria-per-concept={side.max_criteria_per_concept} "
            f"mean-variables-per-concept={fmt(side.mean_variables_per_concept)} "
            f"max-variables-per-concept={side.max_variables_per_concept}"
        )
    return "\n".join(lines) + "\n"


def stats_json(summary: OntologyStats) -> str:
    def side(s):
        return {
            "criteria": s.criteria,
            "concepts": s.concepts,
            "variables": s.variables,
            "mean_criteria_per_concept": jsonable(s.mean_criteria_per_concept),
            "max_criteria_per_concept": s.max_criteria_per_concept,
            "mean_variables_per_concept": jsonable(s.mean_variables_per_concept),
            "max_variables_per_concept": s.max_variables_per_concept,
        }

    return dump_json({"godet": side(summary.godet), "mychoice": side(summary.mychoice)})


# ---------------------------------------------------------------------------
# Structural scores
# ---------------------------------------------------------------------------


def scores_rows(scores: StructuralScores) -> list[list]:
    rows = [["variable_id", "label", "influence", "dependence", "quadrant", "is_key"]]
    for s in scores.scores:
        rows.append([s.variable_id, s.label, s.influence, s.dependence, s.quadrant,
                     "yes" if s.is_key else "no"])
    return rows


def scores_json(scores: StructuralScores) -> str:
    return dump_json({
        "variables": [
            {
                "id": s.variable_id,
                "label": s.label,
                "influence": s.influence,
                "dependence": s.dependence,
                "quadrant": s.quadrant,
                "is_key": s.is_key,
            }
            for s in scores.scores
        ],
        "k_used": scores.k_used,
        "converged": scores.converged,
        "medians": {
            "influence": jsonable(scores.influence_median),
            "dependence": jsonable(scores.dependence_median),
        },
    })


def scores_text(scores: StructuralScores) -> str:
    lines = [
        f"{s.variable_id} influence={s.influence} dependence={s.dependence} "
        f"quadrant={s.quadrant}" + (" key" if s.is_key else "")
        for s in scores.scores
    ]
    lines.append(f"k-used={scores.k_used} converged={'yes' if scores.converged else 'no'}")
    return "\n".join(lines) + "\n"


def render_quadrant(scores: StructuralScores, path) -> None:
    """Scatter of (dependence, influence) with median split lines."""
    fig, ax = plt.subplots(figsize=(7, 6))
    for s in scores.scores:
        color = "#c0392b" if s.is_key else "#2c3e50"
        ax.scatter(s.dependence, s.influence, s=60 if s.is_key else 30, c=color, zorder=3)
        ax.annotate(s.label, (s.dependence, s.influence), fontsize=8,
                    xytext=(4, 4), textcoords="offset points")
    ax.axvline(float(scores.dependence_median), color="grey", ls="--", lw=0.8)
    ax.axhline(float(scores.influence_median), color="grey", ls="--", lw=0.8)
    ax.set_xlabel("dependence")
    ax.set_ylabel("influence")
    ax.set_title(f"influence/dependence quadrants (power {scores.k_used})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Attitudes
# ---------------------------------------------------------------------------


def attitude_rows(table: AttitudeTable) -> list[list]:
    header = ["stakeholder"] + [str(s) for s in table.scopes]
    rows = [header]
    for sid in table.stakeholder_ids:
        row = [sid]
        for scope in table.scopes:
            value = table.value(sid, scope)
            row.append("" if value is None else fmt(value))
        rows.append(row)
    return rows


def attitude_json(table: AttitudeTable) -> str:
    return dump_json({
        "alternative_id": table.alternative_id,
        "stakeholders": table.stakeholder_ids,
        "scopes": [
            {"scope": str(s), "label": table.labels[str(s)]} for s in table.scopes
        ],
        "cells": {
            sid: {
                str(scope): jsonable(v)
                for scope in table.scopes
                if (v := table.value(sid, scope)) is not None
            }
            for sid in table.stakeholder_ids
        },
    })


def render_attitude_heatmap(table: AttitudeTable, path) -> None:
    grid = [
        [
            float(v) if (v := table.value(sid, scope)) is not None else float("nan")
            for scope in table.scopes
        ]
        for sid in table.stakeholder_ids
    ]
    fig, ax = plt.subplots(
        figsize=(max(6, 0.6 * len(table.scopes)), max(3, 0.5 * len(table.stakeholder_ids)))
    )
    cmap = plt.get_cmap("RdYlGn").copy()
    cmap.set_bad("#dddddd")
    im = ax.imshow(grid, cmap=cmap, vmin=0.0, vmax=1.0, aspect="auto")
    ax.set_xticks(range(len(table.scopes)))
    ax.set_xticklabels([str(s) for s in table.scopes], rotation=45, ha="right", fontsize=7)
    ax.set_yticks(range(len(table.stakeholder_ids)))
    ax.set_yticklabels(table.stakeholder_ids, fontsize=8)
    fig.colorbar(im, ax=ax, label="attitude")
    ax.set_title(f"attitudes toward {table.alternative_id}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Delphi
# ---------------------------------------------------------------------------


def questionnaire_json(q: Questionnaire) -> str:
    return dump_json({
        "round": q.round,
        "k": q.k,
        "prior_ranking": q.prior_ranking,
        "variables": [
            {"id": o.variable_id, "label": o.label, "modalities": o.modalities}
            for o in q.options
        ],
    })


def questionnaire_text(q: Questionnaire) -> str:
    lines = [
        f"round {q.round}: choose exactly {q.k} important variables in the "
        f"{len(q.options)} listed",
        "",
    ]
    if q.prior_ranking:
        lines.insert(1, "previous round ranking: " + ", ".join(q.prior_ranking))
    for o in q.options:
        mods = f" ({'; '.join(o.modalities)})" if o.modalities else ""
        lines.append(f"[ ] {o.variable_id}: {o.label}{mods}")
    return "\n".join(lines) + "\n"


def votes_rows(result: VoteResult) -> list[list]:
    rows = [["rank", "variable_id", "label", "count"]]
    for rank, vid in enumerate(result.ranking, start=1):
        rows.append([rank, vid, result.labels[vid], result.counts[vid]])
    return rows


def votes_json(result: VoteResult) -> str:
    return dump_json({
        "round": result.round,
        "k": result.k,
        "counts": result.counts,
        "ranking": result.ranking,
        "rejected": [{"respondent_id": r, "reason": why} for r, why in result.rejected],
        "valid_ballots": result.valid_count,
        "total_ballots": result.total_count,
        "response_rate": jsonable(result.response_rate),
    })


def votes_text(result: VoteResult) -> str:
    lines = [
        f"{rank}. {vid} {result.labels[vid]}: {result.counts[vid]}"
        for rank, vid in enumerate(result.ranking, start=1)
    ]
    lines.append(
        f"valid={result.valid_count} total={result.total_count} "
        f"rejected={len(result.rejected)}"
    )
    for respondent, reason in result.rejected:
        lines.append(f"rejected {respondent}: {reason}")
    return "\n".join(lines) + "\n"


def render_vote_bars(result: VoteResult, path) -> None:
    labels = [result.labels[vid] for vid in result.ranking]
    counts = [result.counts[vid] for vid in result.ranking]
    fig, ax = plt.subplots(figsize=(max(6, 0.5 * len(labels)), 4))
    ax.bar(range(len(labels)), counts, color="#2980b9")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("approvals")
    ax.set_title(f"round {result.round} ballot counts")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Alignment
# ---------------------------------------------------------------------------


def alignment_json(rep: AlignmentReport) -> str:
    summary = json.loads(stats_json(rep.sides))
    return dump_json({
        "sides": summary,
        "unmapped_mcriteria": rep.unmapped_mcriteria,
        "unmapped_variables": rep.unmapped_variables,
        "multi_parent_concepts": [
            {
                "concept_id": e.concept_id,
                "label": e.label,
                "variable_ids": e.variable_ids,
                "resolution": e.resolution,
            }
            for e in rep.multi_parent_concepts
        ],
        "collapsible_groups": rep.collapsible_groups,
        "unassigned_criteria": rep.unassigned_criteria,
        "discrepancies": rep.discrepancy_count,
    })


def alignment_text(rep: AlignmentReport) -> str:
    lines = [stats_text(rep.sides).rstrip("\n")]
    lines.append(f"unmapped-mcriteria: {', '.join(rep.unmapped_mcriteria) or 'none'}")
    lines.append(f"unmapped-variables: {', '.join(rep.unmapped_variables) or 'none'}")
    if rep.multi_parent_concepts:
        for e in rep.multi_parent_concepts:
            resolution = e.resolution or "UNRESOLVED"
            lines.append(
                f"multi-parent {e.concept_id} ({e.label}): "
                f"{', '.join(e.variable_ids)} -> {resolution}"
            )
    else:
        lines.append("multi-parent concepts: none")
    if rep.collapsible_groups:
        for vid, group in rep.collapsible_groups.items():
            lines.append(f"combine {', '.join(group)} -> {vid}")
    else:
        lines.append("collapsible criterion groups: none")
    lines.append(f"unassigned-criteria: {rep.unassigned_criteria}")
    lines.append(f"discrepancies: {rep.discrepancy_count}")
    return "\n".join(lines) + "\n"


def render_alignment_counts(rep: AlignmentReport, path) -> None:
    measures = ["criteria", "concepts", "variables"]
    godet = [rep.sides.godet.criteria, rep.sides.godet.concepts, rep.sides.godet.variables]
    mychoice = [
        rep.sides.mychoice.criteria, rep.sides.mychoice.concepts, rep.sides.mychoice.variables
    ]
    x = range(len(measures))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([i - 0.2 for i in x], godet, width=0.4, label="variable side", color="#27ae60")
    ax.bar([i + 0.2 for i in x], mychoice, width=0.4, label="argumentation side",
           color="#8e44ad")
    ax.set_xticks(list(x))
    ax.set_xticklabels(measures)
    ax.set_yscale("log")
    ax.legend()
    ax.set_title("side-by-side ontology counts")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
