import json
import subprocess
import sys

import pytest

from conftest import REPO_ROOT, TS
from prospect import cli, ontology as o, store

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def run_cli(argv, capsys):
    code = cli.run(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_stats_prints_table1_counts_exactly(table1_path, capsys):
    code, out, _ = run_cli(["stats", "--project", str(table1_path)], capsys)
    assert code == 0
    assert out.splitlines() == [
        "godet: criteria=626 concepts=169 variables=12 "
        "mean-criteria-per-concept=3.7041 max-criteria-per-concept=24 "
        "mean-variables-per-concept=1.0118 max-variables-per-concept=2",
        "mychoice: criteria=313 concepts=237 variables=16 "
        "mean-criteria-per-concept=1.3207 max-criteria-per-concept=12 "
        "mean-variables-per-concept=1.0000 max-variables-per-concept=1",
    ]


def test_stats_json_format(table1_path, capsys):
    code, out, _ = run_cli(
        ["stats", "--project", str(table1_path), "--format", "json"], capsys
    )
    assert code == 0
    data = json.loads(out)
    assert data["godet"]["criteria"] == 626
    assert data["mychoice"]["variables"] == 16


def test_keys_returns_exactly_four(table1_path, capsys):
    code, out, _ = run_cli(
        ["keys", "--project", str(table1_path), "--n-keys", "4"], capsys
    )
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 4
    assert lines[0].startswith("1. ")


def test_micmac_zero_matrix_prints_all_zero_scores(tmp_path, capsys):
    matrix = tmp_path / "zero.csv"
    matrix.write_text("variable,a,b,c\na,0,0,0\nb,0,0,0\nc,0,0,0\n")
    code, out, _ = run_cli(["micmac", "--matrix", str(matrix)], capsys)
    assert code == 0
    assert out.splitlines() == [
        "a influence=0 dependence=0 quadrant=autonomous",
        "b influence=0 dependence=0 quadrant=autonomous",
        "c influence=0 dependence=0 quadrant=autonomous",
        "k-used=1 converged=yes",
    ]


def test_delphi_aggregate_matches_hand_counts(table1_path, capsys):
    # ballots in the fixture: r1 {01..05}, r2 {02..06}, r3 {01,02,03,04,06}
    code, out, _ = run_cli(
        ["delphi", "aggregate", "--project", str(table1_path)], capsys
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "1. var02 variable theme 02: 3"
    assert lines[1] == "2. var03 variable theme 03: 3"
    assert lines[2] == "3. var04 variable theme 04: 3"
    assert lines[3] == "4. var01 variable theme 01: 2"
    assert lines[4] == "5. var05 variable theme 05: 2"
    assert lines[5] == "6. var06 variable theme 06: 2"
    assert "valid=3 total=3 rejected=0" in lines[-1]


def test_delphi_gen_pick_five_of_twelve(table1_path, capsys):
    code, out, _ = run_cli(
        ["delphi", "gen", "--project", str(table1_path), "--k", "5"], capsys
    )
    assert code == 0
    assert "choose exactly 5 important variables in the 12 listed" in out
    assert out.count("[ ]") == 12


def test_delphi_confirm_runs(table1_path, capsys):
    code, out, _ = run_cli(
        ["delphi", "confirm", "--project", str(table1_path), "--n-keys", "4"], capsys
    )
    assert code == 0
    assert out.startswith("confirmed:")
    assert "demotions:" in out and "promotions:" in out


def test_usage_error_exit_code_two():
    with pytest.raises(SystemExit) as exit_info:
        cli.build_parser().parse_args(["stats", "--bogus"])
    assert exit_info.value.code == 2


def test_domain_error_exit_code_one(tmp_path, capsys):
    code, _, err = run_cli(
        ["stats", "--project", str(tmp_path / "missing.prospect.json")], capsys
    )
    assert code == 1
    assert "error:" in err


def test_cli_stdout_is_byte_identical_across_runs(table1_path):
    def run_once():
        return subprocess.run(
            [sys.executable, "-m", "prospect.cli", "stats", "--project", str(table1_path)],
            capture_output=True, check=True, cwd=REPO_ROOT,
        ).stdout

    assert run_once() == run_once()


def test_full_project_workflow(tmp_path, capsys):
    project_path = tmp_path / "demo.prospect.json"
    sources = tmp_path / "sources.csv"
    sources.write_text(
        "source_id,kind,title\n"
        "s1,interview,breeder\n"
        "s2,document,report\n"
    )
    criteria = tmp_path / "criteria.csv"
    criteria.write_text(
        "criterion_id,raw_text,source_id\n"
        "k1,labour cost,s1\n"
        "k2,cost of labour,s2\n"
        "k3,feed price,s1\n"
    )
    code, out, _ = run_cli(
        ["ingest", "--project", str(project_path), "--sources", str(sources),
         "--criteria", str(criteria)],
        capsys,
    )
    assert code == 0
    assert out == "sources=2 interviews=1 documents=1 criteria=3\n"

    # seed two concepts and variables directly, then review suggestions
    project = store.load(project_path)
    c1 = o.create_concept(project, "labour cost", timestamp=TS)
    c2 = o.create_concept(project, "feed price", timestamp=TS)
    v1 = o.create_variable(project, "production costs", timestamp=TS)
    v2 = o.create_variable(project, "supply", timestamp=TS)
    o.attach_variable(project, c1, v1, timestamp=TS)
    o.attach_variable(project, c2, v2, timestamp=TS)
    store.save(project, project_path)

    batch_csv = tmp_path / "suggestions.csv"
    code, out, _ = run_cli(
        ["suggest", "--project", str(project_path), "--threshold", "0.9",
         "--out", str(batch_csv)],
        capsys,
    )
    assert code == 0
    # the decision column is exported empty; fill it with accepts
    rows = batch_csv.read_text().splitlines()
    decided = [rows[0]] + [row + "accept" for row in rows[1:]]
    batch_csv.write_text("\n".join(decided) + "\n")
    code, out, _ = run_cli(
        ["apply", "--project", str(project_path), "--decisions", str(batch_csv)],
        capsys,
    )
    assert code == 0
    project = store.load(project_path)
    assert project.state.criterion_assignment

    relations = tmp_path / "relations.csv"
    relations.write_text(
        f"from_concept,to_concept,weight,source_id\n{c1},{c2},2,s1\n"
    )
    code, out, _ = run_cli(
        ["relations", "import", "--project", str(project_path), "--file", str(relations)],
        capsys,
    )
    assert code == 0
    assert out == "relations-imported=1\n"

    code, out, _ = run_cli(["micmac", "--project", str(project_path)], capsys)
    assert code == 0
    assert "k-used=1 converged=yes" in out

    code, out, _ = run_cli(
        ["keys", "--project", str(project_path), "--n-keys", "1"], capsys
    )
    assert code == 0
    assert len(out.splitlines()) == 1


def test_plots_written(table1_path, tmp_path, capsys):
    quadrant = tmp_path / "quadrant.png"
    code, _, _ = run_cli(
        ["keys", "--project", str(table1_path), "--n-keys", "4",
         "--plot", str(quadrant), "--out", str(tmp_path / "scores.csv")],
        capsys,
    )
    assert code == 0
    assert quadrant.read_bytes()[:8] == PNG_MAGIC
    assert (tmp_path / "scores.csv").read_text().startswith(
        "variable_id,label,influence,dependence,quadrant,is_key"
    )

    heatmap = tmp_path / "attitudes.png"
    code, _, _ = run_cli(
        ["attitude", "--project", str(table1_path), "--alternative", "business-as-usual",
         "--out", str(tmp_path / "attitudes.csv"), "--plot", str(heatmap)],
        capsys,
    )
    assert code == 0
    assert heatmap.read_bytes()[:8] == PNG_MAGIC

    bars = tmp_path / "votes.png"
    code, _, _ = run_cli(
        ["delphi", "aggregate", "--project", str(table1_path), "--plot", str(bars)],
        capsys,
    )
    assert code == 0
    assert bars.read_bytes()[:8] == PNG_MAGIC

    counts = tmp_path / "alignment.png"
    code, _, _ = run_cli(
        ["align", "report", "--project", str(table1_path), "--plot", str(counts)],
        capsys,
    )
    assert code == 0
    assert counts.read_bytes()[:8] == PNG_MAGIC


def test_attitude_single_scope_matches_library(table1_path, capsys):
    from prospect.acceptability import Scope, attitude

    project = store.load(table1_path)
    expected = attitude(project.state.mychoice, "s01", "business-as-usual", Scope("global"))
    code, out, _ = run_cli(
        ["attitude", "--project", str(table1_path), "--alternative", "business-as-usual",
         "--stakeholder", "s01", "--scope", "global"],
        capsys,
    )
    assert code == 0
    assert out == f"s01 global {float(expected.value):.4f}\n"


def test_align_conversion_files_round_trip(table1_path, tmp_path, capsys):
    dataset_path = tmp_path / "dataset.json"
    code, out, _ = run_cli(
        ["align", "to-mychoice", "--project", str(table1_path),
         "--out", str(dataset_path)],
        capsys,
    )
    assert code == 0
    assert "aims=169" in out  # one aim per concept
    fragment_path = tmp_path / "fragment.json"
    code, out, _ = run_cli(
        ["align", "to-godet", "--project", str(table1_path),
         "--input", str(dataset_path), "--out", str(fragment_path)],
        capsys,
    )
    assert code == 0
    fragment = json.loads(fragment_path.read_text())
    assert len(fragment["criteria"]) == 626
    assert len(fragment["concepts"]) == 169
    assert len(fragment["variables"]) == 12


def test_align_report_text(table1_path, capsys):
    code, out, _ = run_cli(["align", "report", "--project", str(table1_path)], capsys)
    assert code == 0
    assert "discrepancies: 0" in out
    assert "combine mc09, mc10 -> var09" in out


def test_journal_export_ndjson(table1_path, tmp_path, capsys):
    code, out, _ = run_cli(
        ["journal", "export", "--project", str(table1_path)], capsys
    )
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 1791
    first = json.loads(lines[0])
    assert first["seq"] == 1 and first["action"] == "create_variable"
    out_file = tmp_path / "journal.ndjson"
    code, out, _ = run_cli(
        ["journal", "export", "--project", str(table1_path), "--out", str(out_file)],
        capsys,
    )
    assert code == 0
    assert out == "journal-records=1791\n"
    assert len(out_file.read_text().splitlines()) == 1791
