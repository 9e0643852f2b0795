import pathlib

import pytest

from prospect import ontology as o
from prospect.corpus import Criterion, SourceText

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
TABLE1 = REPO_ROOT / "fixtures" / "table1.prospect.json"

TS = "2026-02-01T09:00:00+00:00"


@pytest.fixture(scope="session")
def table1_path() -> pathlib.Path:
    assert TABLE1.exists(), "run tools/generate_table1_fixture.py first"
    return TABLE1


def make_project(n_sources: int = 2) -> o.Project:
    """Empty project with a couple of interview sources to hang data on."""
    project = o.new_project()
    for i in range(1, n_sources + 1):
        project.corpus.add_source(
            SourceText(id=f"s{i}", kind="interview", title=f"interview {i}")
        )
    return project


def add_criterion(project: o.Project, cid: str, text: str, source: str = "s1") -> None:
    project.corpus.add_criterion(Criterion(id=cid, raw_text=text, source_id=source))


@pytest.fixture
def production_costs_project() -> o.Project:
    """The worked example: two concepts under the production costs variable."""
    project = make_project()
    add_criterion(project, "k1", "labour cost")
    add_criterion(project, "k2", "cost of labour", source="s2")
    add_criterion(project, "k3", "need for investments")
    c1 = o.create_concept(project, "labour cost", concept_id="c1", timestamp=TS)
    c2 = o.create_concept(project, "need for investments", concept_id="c2", timestamp=TS)
    v1 = o.create_variable(project, "production costs", variable_id="v1", timestamp=TS)
    o.attach_variable(project, c1, v1, timestamp=TS)
    o.attach_variable(project, c2, v1, timestamp=TS)
    o.define_modality(project, v1, "production costs mastered", timestamp=TS)
    o.define_modality(project, v1, "fluctuating production costs", timestamp=TS)
    o.assign_criterion(project, "k1", c1, timestamp=TS)
    o.assign_criterion(project, "k3", c2, timestamp=TS)
    return project
