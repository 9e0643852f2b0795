"""Workbench for structuring stakeholder-interview ontologies.

Groups verbatim criteria into concepts and variables, analyzes
influence/dependence to select key variables, confirms them by Delphi
ballots, aligns the variable-side schema with the argumentation-side one
and scores the acceptability of an alternative. Every edit goes through an
append-only journal, so any state is reproducible by replay.
"""

from .corpus import Corpus, Criterion, SourceText, load_corpus, normalize
from .errors import WorkbenchError
from .ontology import Project, ProjectConfig, new_project, stats
from .store import load, save

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "Criterion",
    "SourceText",
    "Project",
    "ProjectConfig",
    "WorkbenchError",
    "load",
    "load_corpus",
    "new_project",
    "normalize",
    "save",
    "stats",
    "__version__",
]
