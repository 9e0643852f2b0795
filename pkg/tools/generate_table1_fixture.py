#!/usr/bin/env python3
"""Regenerate fixtures/table1.prospect.json.

A synthetic pork value-chain project at realistic scale: 21 sources
(12 interviews, 9 documents), 626 criteria grouped into 169 concepts under
12 variables (largest concept 24 criteria), and an argumentation side with
16 criteria, 237 aims and 313 properties (largest aim 12 properties), plus
relations, an alternative, the 16-to-12 combination map and three ballots.

Deterministic: fixed ids, fixed timestamps, no randomness. Run from the
repository root:

    python tools/generate_table1_fixture.py
"""

from __future__ import annotations

import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from prospect import ontology as o  # noqa: E402
from prospect import store  # noqa: E402
from prospect.corpus import Criterion, SourceText  # noqa: E402
from prospect.delphi import submit_ballot  # noqa: E402

TS = "2026-01-15T10:00:00+00:00"

ADJECTIVES = [
    "rising", "steady", "fragile", "shared", "local", "export", "seasonal",
    "strict", "informal", "novel", "legacy", "joint",
]
NOUNS = [
    "feed price", "labour supply", "welfare rule", "traceability", "demand",
    "slaughter capacity", "margin", "image", "contract", "inspection",
    "logistics", "genetics", "packaging", "waste",
]


def phrase(i: int) -> str:
    return f"{ADJECTIVES[i % len(ADJECTIVES)]} {NOUNS[(i * 7) % len(NOUNS)]} {i:04d}"


def main() -> None:
    project = o.new_project()

    source_ids = [f"s{i:02d}" for i in range(1, 13)] + [f"d{i:02d}" for i in range(1, 10)]
    for sid in source_ids:
        kind = "interview" if sid.startswith("s") else "document"
        project.corpus.add_source(
            SourceText(id=sid, kind=kind, title=f"{kind} {sid}", date="2021-03-01")
        )

    for i in range(1, 627):
        project.corpus.add_criterion(
            Criterion(
                id=f"crit{i:04d}",
                raw_text=phrase(i),
                source_id=source_ids[i % len(source_ids)],
                span=(0, len(phrase(i))),
            )
        )

    for i in range(1, 13):
        vid = f"var{i:02d}"
        o.create_variable(project, f"variable theme {i:02d}", variable_id=vid, timestamp=TS)
        o.define_modality(project, vid, f"theme {i:02d} mastered", timestamp=TS)
        o.define_modality(project, vid, f"theme {i:02d} fluctuating", timestamp=TS)

    # concept sizes: one of 24, then 98 of 4 and 70 of 3 -> 626 criteria
    sizes = [24] + [4] * 98 + [3] * 70
    assert sum(sizes) == 626 and len(sizes) == 169
    next_criterion = 1
    for idx, size in enumerate(sizes, start=1):
        cid = f"con{idx:03d}"
        o.create_concept(project, f"idea {phrase(idx * 3)}", concept_id=cid, timestamp=TS)
        o.attach_variable(project, cid, f"var{(idx - 1) % 12 + 1:02d}", timestamp=TS)
        for _ in range(size):
            o.assign_criterion(project, f"crit{next_criterion:04d}", cid, timestamp=TS)
            next_criterion += 1

    # two concepts live under a second variable; both resolutions recorded
    o.attach_variable(project, "con001", "var02", timestamp=TS)
    o.attach_variable(project, "con002", "var03", timestamp=TS)

    # concept-level influence relations
    for i in range(60):
        src = f"con{(i * 7) % 169 + 1:03d}"
        dst = f"con{(i * 11 + 3) % 169 + 1:03d}"
        if src == dst:
            continue
        o.add_relation(project, src, dst, i % 3 + 1,
                       source_ids[i % len(source_ids)], timestamp=TS)

    # argumentation side: 16 criteria, 237 aims, 313 property groups
    for i in range(1, 17):
        o.create_mcriterion(project, f"axis {i:02d}", mcriterion_id=f"mc{i:02d}", timestamp=TS)
    group_sizes = [12] + [2] * 65 + [1] * 171
    assert sum(group_sizes) == 313 and len(group_sizes) == 237
    stakeholder_cursor = 0
    for idx, groups in enumerate(group_sizes, start=1):
        aid = f"aim{idx:03d}"
        o.create_aim(project, f"aim {phrase(idx * 5)}", f"mc{(idx - 1) % 16 + 1:02d}",
                     aim_id=aid, timestamp=TS)
        for g in range(groups):
            denomination = f"driver {idx:03d} {g:02d}"
            pairs = [("steady", "positive")]
            if (idx + g) % 2 == 0:
                pairs.append(("volatile", "negative"))
            for value, evaluation in pairs:
                stakeholder = source_ids[stakeholder_cursor % len(source_ids)]
                stakeholder_cursor += 1
                o.add_property(project, denomination, value, evaluation, aid,
                               stakeholder, timestamp=TS)

    o.create_alternative(project, "pursuing business as usual",
                         alternative_id="business-as-usual", timestamp=TS)

    map_payload = json.loads(
        (ROOT / "src/prospect/data/mychoice_combination_map.json").read_text()
    )
    o.set_alignment(project, map_payload, timestamp=TS)
    o.set_parent_resolution(project, "con001", "var01", timestamp=TS)
    o.set_parent_resolution(project, "con002", "var02", timestamp=TS)

    for respondent, picks in [
        ("r1", ["var01", "var02", "var03", "var04", "var05"]),
        ("r2", ["var02", "var03", "var04", "var05", "var06"]),
        ("r3", ["var01", "var02", "var03", "var04", "var06"]),
    ]:
        submit_ballot(project, respondent, 1, picks, k=5, timestamp=TS)

    summary = o.stats(project)
    assert summary.godet.criteria == 626
    assert summary.godet.concepts == 169
    assert summary.godet.variables == 12
    assert summary.godet.max_criteria_per_concept == 24
    assert summary.mychoice.criteria == 313
    assert summary.mychoice.concepts == 237
    assert summary.mychoice.variables == 16
    assert summary.mychoice.max_criteria_per_concept == 12

    out = ROOT / "fixtures" / "table1.prospect.json"
    out.parent.mkdir(exist_ok=True)
    store.save(project, out)
    print(f"wrote {out} ({out.stat().st_size} bytes, journal={len(project.journal)} records)")


if __name__ == "__main__":
    main()
