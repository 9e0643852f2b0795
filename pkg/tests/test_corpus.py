import json

import pytest
from hypothesis import given, strategies as st

from conftest import make_project
from prospect import store
from prospect.corpus import (
    Corpus,
    Criterion,
    SourceText,
    import_criteria_csv,
    import_sources_csv,
    load_corpus,
    normalize,
)
from prospect.errors import DuplicateIdError, UnknownIdError, ValidationError


# Expected values below were derived by hand-applying the normalization
# rule list: lower-case, fold diacritics/ligatures, punctuation and
# apostrophes to single spaces, collapse whitespace, trim.
def test_normalize_french_ligature_and_diacritics():
    assert normalize("Coût de la main-d'œuvre") == "cout de la main d oeuvre"


def test_normalize_empty():
    assert normalize("") == ""


def test_normalize_idempotent_on_punctuated_text():
    once = normalize("Labour   Cost!")
    assert once == "labour cost"
    assert normalize(once) == once


@given(st.text(max_size=80))
def test_normalize_idempotent(text):
    assert normalize(normalize(text)) == normalize(text)


def test_criterion_normalized_text_derived():
    c = Criterion(id="k1", raw_text="Coûts de Production", source_id="s1")
    assert c.normalized_text == normalize(c.raw_text)


def test_criterion_rejects_wrong_normalized_text():
    with pytest.raises(ValidationError):
        Criterion(id="k1", raw_text="abc", source_id="s1", normalized_text="zzz")


def test_criterion_requires_raw_text():
    with pytest.raises(ValidationError):
        Criterion(id="k1", raw_text="", source_id="s1")


def test_source_kind_restricted():
    with pytest.raises(ValidationError):
        SourceText(id="s1", kind="webinar")


def test_load_corpus_per_kind_counts(table1_path):
    corpus = load_corpus(table1_path)
    assert corpus.interview_count == 12
    assert corpus.document_count == 9
    assert corpus.source_count == 21
    assert len(corpus.criteria) == 626


def test_empty_criteria_list_one_source():
    corpus = Corpus()
    corpus.add_source(SourceText(id="s1", kind="interview"))
    assert len(corpus.criteria) == 0
    assert corpus.source_count == 1


def test_duplicate_source_id_names_the_id():
    corpus = Corpus()
    corpus.add_source(SourceText(id="s1", kind="interview"))
    with pytest.raises(DuplicateIdError, match="'s1'"):
        corpus.add_source(SourceText(id="s1", kind="document"))


def test_dangling_source_reference():
    corpus = Corpus()
    corpus.add_source(SourceText(id="s1", kind="interview"))
    with pytest.raises(UnknownIdError, match="ghost"):
        corpus.add_criterion(Criterion(id="k1", raw_text="x", source_id="ghost"))


def test_malformed_project_file_reports_location(tmp_path):
    project = make_project()
    path = tmp_path / "p.prospect.json"
    store.save(project, path)
    document = json.loads(path.read_text())
    document["payload"]["corpus"]["sources"].append({"id": "s9"})  # kind missing
    document["checksum"] = store._checksum(document["payload"])
    path.write_text(json.dumps(document))
    with pytest.raises(store.SchemaError, match="/corpus/sources/2"):
        store.load(path)


def test_corpus_round_trip_structural_equality(tmp_path):
    project = make_project()
    project.corpus.add_criterion(
        Criterion(id="k1", raw_text="Coût de la main-d'œuvre", source_id="s1", span=(3, 28))
    )
    path = tmp_path / "p.prospect.json"
    store.save(project, path)
    reloaded = load_corpus(path)
    assert store.corpus_to_payload(reloaded) == store.corpus_to_payload(project.corpus)


def test_csv_import(tmp_path):
    sources = tmp_path / "sources.csv"
    sources.write_text(
        "source_id,kind,title,stakeholder_category,date\n"
        "s1,interview,breeder,producer,2021-02-03\n"
        "d1,document,sector report,,\n",
        encoding="utf-8",
    )
    criteria = tmp_path / "criteria.csv"
    criteria.write_text(
        "criterion_id,raw_text,source_id,span_start,span_end\n"
        "k1,Coût de la main-d'œuvre,s1,10,33\n"
        "k2,traceability,d1,,\n",
        encoding="utf-8",
    )
    corpus = Corpus()
    assert import_sources_csv(corpus, sources) == 2
    assert import_criteria_csv(corpus, criteria) == 2
    assert corpus.criteria["k1"].normalized_text == "cout de la main d oeuvre"
    assert corpus.criteria["k1"].span == (10, 33)
    assert corpus.criteria["k2"].span is None
    assert corpus.sources["s1"].stakeholder_category == "producer"
    assert corpus.sources["d1"].stakeholder_category is None


def test_csv_import_duplicate_reports_row(tmp_path):
    path = tmp_path / "criteria.csv"
    path.write_text(
        "criterion_id,raw_text,source_id\nk1,a,s1\nk1,b,s1\n", encoding="utf-8"
    )
    corpus = Corpus()
    corpus.add_source(SourceText(id="s1", kind="interview"))
    with pytest.raises(DuplicateIdError, match=":3"):
        import_criteria_csv(corpus, path)


def test_csv_import_missing_columns(tmp_path):
    path = tmp_path / "criteria.csv"
    path.write_text("criterion_id,raw_text\nk1,a\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="source_id"):
        import_criteria_csv(Corpus(), path)
