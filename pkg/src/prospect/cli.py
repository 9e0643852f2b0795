"""Batch command line covering the full pipeline for both methods.

Exit codes: 0 on success, 1 on a domain error, 2 on a usage error. Data
goes to stdout and is byte-identical for identical inputs; anything with a
clock on it goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources

from filelock import FileLock

from . import acceptability, alignment, delphi, matcher, ontology, report, store, structural
from .corpus import import_criteria_csv, import_sources_csv
from .errors import ValidationError, WorkbenchError


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--project", help="path to the .prospect.json project file")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--actor", default="facilitator")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="prospect",
        description="Structure interview extractions into variables, analyze influence, "
        "confirm key variables and score acceptability.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common],
                       help="create or extend a project from sources/criteria CSV files")
    p.add_argument("--sources", help="CSV: source_id,kind,title[,stakeholder_category,date]")
    p.add_argument("--criteria",
                   help="CSV: criterion_id,raw_text,source_id[,span_start,span_end]")

    p = sub.add_parser("suggest", parents=[common],
                       help="rank candidate groupings above the threshold")
    p.add_argument("--threshold", help="similarity threshold in [0,1], e.g. 0.6")
    p.add_argument("--limit", type=int)
    p.add_argument("--out", help="write the batch as CSV for offline review")

    p = sub.add_parser("apply", parents=[common],
                       help="apply a reviewed suggestions CSV (accept/reject per row)")
    p.add_argument("--decisions", required=True)

    sub.add_parser("stats", parents=[common], help="counts and concept-size shape, both sides")

    relations = sub.add_parser("relations", help="influence relation management")
    rsub = relations.add_subparsers(dest="relations_command", required=True)
    p = rsub.add_parser("import", parents=[common],
                        help="CSV: from_concept,to_concept,weight,source_id")
    p.add_argument("--file", required=True)

    journal = sub.add_parser("journal", help="decision journal access")
    jsub = journal.add_subparsers(dest="journal_command", required=True)
    p = jsub.add_parser("export", parents=[common],
                        help="dump the journal as newline-delimited JSON records")
    p.add_argument("--out", help="write to a file instead of stdout")

    p = sub.add_parser("micmac", parents=[common],
                       help="direct/indirect influence scores from matrix powers")
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--matrix", help="run on a matrix CSV instead of the project relations")
    p.add_argument("--out", help="write scores as CSV")
    p.add_argument("--plot", help="render the quadrant scatter to this file")
    p.add_argument("--matrix-out", dest="matrix_out", help="export the lifted matrix as CSV")

    p = sub.add_parser("keys", parents=[common], help="select and flag the key variables")
    p.add_argument("--n-keys", type=int, dest="n_keys")
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--out", help="write full scores (with key flags) as CSV")
    p.add_argument("--plot", help="render the quadrant scatter to this file")

    align = sub.add_parser("align", help="convert and compare the two schemas")
    asub = align.add_subparsers(dest="align_command", required=True)
    p = asub.add_parser("report", parents=[common], help="side-by-side alignment report")
    p.add_argument("--map", dest="map_path", help="alignment map JSON (defaults to stored map)")
    p.add_argument("--plot", help="render side-by-side counts to this file")
    p = asub.add_parser("to-mychoice", parents=[common],
                        help="convert the variable side into an argumentation dataset")
    p.add_argument("--map", dest="map_path")
    p.add_argument("--out", required=True)
    p = asub.add_parser("to-godet", parents=[common],
                        help="convert an argumentation dataset into a variable-side fragment")
    p.add_argument("--map", dest="map_path")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("attitude", parents=[common],
                       help="acceptability of an alternative, one scope or the full matrix")
    p.add_argument("--alternative", required=True)
    p.add_argument("--stakeholder")
    p.add_argument("--scope", default="global",
                   help="global, mcriterion:ID or aim:ID (with --stakeholder)")
    p.add_argument("--out", help="write the stakeholder-by-scope matrix as CSV")
    p.add_argument("--plot", help="render the attitude heatmap to this file")

    dl = sub.add_parser("delphi", help="questionnaires, ballots and confirmation")
    dsub = dl.add_subparsers(dest="delphi_command", required=True)
    p = dsub.add_parser("gen", parents=[common], help="generate a choose-k questionnaire")
    p.add_argument("--k", type=int)
    p.add_argument("--round", type=int, default=1)
    p.add_argument("--out", help="write the questionnaire as JSON")
    p = dsub.add_parser("aggregate", parents=[common], help="approval-count one round")
    p.add_argument("--ballots", help="JSON ballots file; defaults to the project's ballots")
    p.add_argument("--round", type=int, default=1)
    p.add_argument("--k", type=int)
    p.add_argument("--store", action="store_true",
                   help="journal valid file ballots into the project")
    p.add_argument("--out", help="write counts as CSV")
    p.add_argument("--plot", help="render the ballot bar chart to this file")
    p = dsub.add_parser("confirm", parents=[common],
                        help="confront structural keys with the vote ranking")
    p.add_argument("--n-keys", type=int, dest="n_keys")
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--round", type=int, default=1)
    p.add_argument("--k", type=int)
    p.add_argument("--ballots")

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.add_argument("--ui-dir", dest="ui_dir", help="static web UI directory to mount at /ui")
    p.add_argument("--no-autosave", dest="autosave", action="store_false")

    return parser


def _need_project(args) -> str:
    if not args.project:
        raise ValidationError("this command needs --project")
    return args.project


def _load(args) -> ontology.Project:
    return store.load(_need_project(args))


def _emit(args, text: str, json_str: str | None = None, csv_rows: list | None = None) -> None:
    if args.format == "json" and json_str is not None:
        sys.stdout.write(json_str)
    elif args.format == "csv" and csv_rows is not None:
        sys.stdout.write(report.csv_text(csv_rows))
    else:
        sys.stdout.write(text)


def default_map_payload() -> dict:
    data = resources.files("prospect.data").joinpath("mychoice_combination_map.json")
    return json.loads(data.read_text(encoding="utf-8"))


def _resolve_map(args, project: ontology.Project) -> alignment.AlignmentMap:
    if getattr(args, "map_path", None):
        return alignment.load_map(args.map_path)
    return alignment.AlignmentMap.from_payload(project.state.alignment_map)


# ---------------------------------------------------------------------------
# Command bodies
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    path = _need_project(args)
    with FileLock(path + ".lock"):
        try:
            project = store.load(path)
        except FileNotFoundError:
            project = ontology.new_project()
        if args.sources:
            import_sources_csv(project.corpus, args.sources)
        if args.criteria:
            import_criteria_csv(project.corpus, args.criteria)
        store.save(project, path, lock=False)
    corpus = project.corpus
    sys.stdout.write(
        f"sources={corpus.source_count} interviews={corpus.interview_count} "
        f"documents={corpus.document_count} criteria={len(corpus.criteria)}\n"
    )
    return 0


def cmd_suggest(args) -> int:
    project = _load(args)
    threshold = Fraction(args.threshold) if args.threshold else None
    batch = matcher.suggest(project, threshold=threshold, limit=args.limit)
    if args.out:
        matcher.write_suggestions_csv(batch, args.out)
    rows = [["rank", "kind", "subject_id", "subject_label", "target_id", "target_label",
             "score"]]
    lines = []
    for s in batch:
        rows.append([s.rank, s.kind, s.subject_id, s.subject_label, s.target_id,
                     s.target_label, f"{float(s.score):.6f}"])
        lines.append(
            f"{s.rank}. [{s.kind}] {s.subject_label!r} -> {s.target_label!r} "
            f"score={float(s.score):.4f}"
        )
    text = ("\n".join(lines) + "\n") if lines else "no suggestions\n"
    json_str = report.dump_json([
        {
            "rank": s.rank, "kind": s.kind, "subject_id": s.subject_id,
            "subject_label": s.subject_label, "target_id": s.target_id,
            "target_label": s.target_label, "score": float(s.score),
        }
        for s in batch
    ])
    _emit(args, text, json_str, rows)
    return 0


def cmd_apply(args) -> int:
    path = _need_project(args)
    with FileLock(path + ".lock"):
        project = store.load(path)
        outcome = matcher.apply_decisions_csv(project, args.decisions, actor=args.actor)
        store.save(project, path, lock=False)
    sys.stdout.write(
        f"accepted={outcome['accepted']} rejected={outcome['rejected']} "
        f"skipped={outcome['skipped']} stale={outcome['stale']}\n"
    )
    return 0


def cmd_stats(args) -> int:
    summary = ontology.stats(_load(args))
    _emit(args, report.stats_text(summary), report.stats_json(summary),
          report.stats_rows(summary))
    return 0


def cmd_relations_import(args) -> int:
    import csv as _csv

    path = _need_project(args)
    with FileLock(path + ".lock"):
        project = store.load(path)
        added = 0
        with open(args.file, newline="", encoding="utf-8") as fh:
            reader = _csv.DictReader(fh)
            needed = {"from_concept", "to_concept", "weight", "source_id"}
            have = set(reader.fieldnames or ())
            if not needed <= have:
                raise ValidationError(f"{args.file}: missing CSV columns {sorted(needed - have)}")
            for lineno, row in enumerate(reader, start=2):
                try:
                    weight = int(row["weight"])
                except ValueError:
                    raise ValidationError(f"{args.file}:{lineno}: weight must be an integer")
                ontology.add_relation(
                    project,
                    row["from_concept"].strip(),
                    row["to_concept"].strip(),
                    weight,
                    row["source_id"].strip(),
                    actor=args.actor,
                )
                added += 1
        store.save(project, path, lock=False)
    sys.stdout.write(f"relations-imported={added}\n")
    return 0


def cmd_journal_export(args) -> int:
    project = _load(args)
    text = store.journal_ndjson(project.journal)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        sys.stdout.write(f"journal-records={len(project.journal)}\n")
    else:
        sys.stdout.write(text)
    return 0


def _scores_for(args, project: ontology.Project | None = None) -> structural.StructuralScores:
    if getattr(args, "matrix", None):
        matrix = structural.read_matrix_csv(args.matrix)
    else:
        project = project or _load(args)
        matrix = structural.build_matrix(project.state)
    if getattr(args, "matrix_out", None):
        structural.write_matrix_csv(matrix, args.matrix_out)
    k_max = args.k_max or (project.config.k_max if project else structural.DEFAULT_K_MAX)
    return structural.micmac(matrix, k_max=k_max)


def cmd_micmac(args) -> int:
    project = None if args.matrix else _load(args)
    scores = _scores_for(args, project)
    if not scores.converged:
        sys.stderr.write(
            f"warning: ranking did not stabilize within k-max={args.k_max or 8} powers\n"
        )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.csv_text(report.scores_rows(scores)))
    if args.plot:
        report.render_quadrant(scores, args.plot)
    _emit(args, report.scores_text(scores), report.scores_json(scores),
          report.scores_rows(scores))
    return 0


def cmd_keys(args) -> int:
    project = _load(args)
    scores = _scores_for(args, project)
    n_keys = args.n_keys or project.config.n_keys
    selected = structural.key_variables(scores, n_keys=n_keys)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.csv_text(report.scores_rows(scores)))
    if args.plot:
        report.render_quadrant(scores, args.plot)
    lines = [
        f"{rank}. {s.variable_id} {s.label} influence={s.influence} "
        f"dependence={s.dependence} quadrant={s.quadrant}"
        for rank, s in enumerate(selected, start=1)
    ]
    text = "\n".join(lines) + "\n"
    json_str = report.dump_json({
        "n_keys": n_keys,
        "keys": [
            {"id": s.variable_id, "label": s.label, "influence": s.influence,
             "dependence": s.dependence, "quadrant": s.quadrant}
            for s in selected
        ],
        "k_used": scores.k_used,
        "converged": scores.converged,
    })
    rows = [["rank", "variable_id", "label", "influence", "dependence", "quadrant"]]
    rows += [[r, s.variable_id, s.label, s.influence, s.dependence, s.quadrant]
             for r, s in enumerate(selected, start=1)]
    _emit(args, text, json_str, rows)
    return 0


def cmd_align_report(args) -> int:
    project = _load(args)
    rep = alignment.alignment_report(project, _resolve_map(args, project))
    if args.plot:
        report.render_alignment_counts(rep, args.plot)
    _emit(args, report.alignment_text(rep), report.alignment_json(rep),
          report.stats_rows(rep.sides))
    return 0


def cmd_align_to_mychoice(args) -> int:
    project = _load(args)
    amap = _resolve_map(args, project)
    fragment = alignment.build_godet_fragment(project)
    result = alignment.godet_to_mychoice(fragment, amap)
    payload = alignment.dataset_to_payload(result.dataset)
    payload["concept_aim_links"] = [list(p) for p in result.concept_aim_links]
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.dump_json(payload))
    dataset = result.dataset
    sys.stdout.write(
        f"mcriteria={len(dataset.mcriteria)} aims={len(dataset.aims)} "
        f"properties={len(dataset.properties)}\n"
    )
    return 0


def cmd_align_to_godet(args) -> int:
    with open(args.input, encoding="utf-8") as fh:
        dataset = alignment.dataset_from_payload(json.load(fh))
    if args.map_path:
        amap = alignment.load_map(args.map_path)
    elif args.project:
        amap = alignment.AlignmentMap.from_payload(_load(args).state.alignment_map)
    else:
        amap = alignment.AlignmentMap.from_payload(default_map_payload())
    result = alignment.mychoice_to_godet(dataset, amap)
    payload = alignment.fragment_to_payload(result.fragment)
    payload["concept_aim_links"] = [list(p) for p in result.concept_aim_links]
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.dump_json(payload))
    fragment = result.fragment
    sys.stdout.write(
        f"variables={len(fragment.variables)} concepts={len(fragment.concepts)} "
        f"criteria={len(fragment.criteria)}\n"
    )
    return 0


def cmd_attitude(args) -> int:
    project = _load(args)
    dataset = project.state.mychoice
    if args.stakeholder:
        scope = acceptability.Scope.parse(args.scope)
        att = acceptability.attitude(dataset, args.stakeholder, args.alternative, scope)
        text = f"{att.stakeholder_id} {att.scope} {report.fmt(att.value)}\n"
        json_str = report.dump_json({
            "stakeholder_id": att.stakeholder_id,
            "alternative_id": att.alternative_id,
            "scope": str(att.scope),
            "value": float(att.value),
        })
        rows = [["stakeholder", "scope", "value"],
                [att.stakeholder_id, str(att.scope), report.fmt(att.value)]]
        _emit(args, text, json_str, rows)
        return 0
    table = acceptability.attitude_matrix(dataset, args.alternative)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.csv_text(report.attitude_rows(table)))
    if args.plot:
        report.render_attitude_heatmap(table, args.plot)
    _emit(args, report.csv_text(report.attitude_rows(table)),
          report.attitude_json(table), report.attitude_rows(table))
    return 0


def cmd_delphi_gen(args) -> int:
    project = _load(args)
    k = args.k or project.config.delphi_k
    prior: list[str] = []
    if args.round > 1:
        labels = {vid: v.label for vid, v in project.state.variables.items()}
        previous = delphi.aggregate(project.state.ballots, k, labels, round=args.round - 1)
        prior = previous.ranking
    questionnaire = delphi.generate_questionnaire(project, k, round=args.round,
                                                  prior_ranking=prior)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.questionnaire_json(questionnaire))
    _emit(args, report.questionnaire_text(questionnaire),
          report.questionnaire_json(questionnaire))
    return 0


def cmd_delphi_aggregate(args) -> int:
    path = _need_project(args)
    if args.ballots and args.store:
        with FileLock(path + ".lock"):
            project = store.load(path)
            k = args.k or project.config.delphi_k
            for ballot in delphi.read_ballots_json(args.ballots):
                delphi.submit_ballot(
                    project, ballot.respondent_id, ballot.round,
                    ballot.chosen_variable_ids, k=k, actor=args.actor,
                )
            store.save(project, path, lock=False)
        ballots = project.state.ballots
    else:
        project = store.load(path)
        k = args.k or project.config.delphi_k
        ballots = (
            delphi.read_ballots_json(args.ballots) if args.ballots else project.state.ballots
        )
    labels = {vid: v.label for vid, v in project.state.variables.items()}
    result = delphi.aggregate(ballots, k, labels, round=args.round)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.csv_text(report.votes_rows(result)))
    if args.plot:
        report.render_vote_bars(result, args.plot)
    _emit(args, report.votes_text(result), report.votes_json(result),
          report.votes_rows(result))
    return 0


def cmd_delphi_confirm(args) -> int:
    project = _load(args)
    matrix = structural.build_matrix(project.state)
    scores = structural.micmac(matrix, k_max=args.k_max or project.config.k_max)
    selected = structural.key_variables(scores, n_keys=args.n_keys or project.config.n_keys)
    key_ids = [s.variable_id for s in selected]
    k = args.k or project.config.delphi_k
    ballots = (
        delphi.read_ballots_json(args.ballots) if args.ballots else project.state.ballots
    )
    labels = {vid: v.label for vid, v in project.state.variables.items()}
    result = delphi.aggregate(ballots, k, labels, round=args.round)
    confirmation = delphi.confirm_keys(result, key_ids)
    text_lines = [
        f"confirmed: {', '.join(confirmation.confirmed) or 'none'} "
        f"({len(confirmation.confirmed)}/{confirmation.n})",
        f"demotions: {', '.join(confirmation.demotions) or 'none'}",
        f"promotions: {', '.join(confirmation.promotions) or 'none'}",
    ]
    json_str = report.dump_json({
        "n": confirmation.n,
        "confirmed": confirmation.confirmed,
        "demotions": confirmation.demotions,
        "promotions": confirmation.promotions,
    })
    rows = [["status", "variable_id"]]
    rows += [["confirmed", v] for v in confirmation.confirmed]
    rows += [["demotion", v] for v in confirmation.demotions]
    rows += [["promotion", v] for v in confirmation.promotions]
    _emit(args, "\n".join(text_lines) + "\n", json_str, rows)
    return 0


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import create_app

    path = _need_project(args)
    if args.ui_dir and not os.path.isdir(args.ui_dir):
        raise ValidationError(
            f"--ui-dir {args.ui_dir!r} is not a directory; build the web client first"
        )
    project = store.load(path)
    app = create_app(project, project_path=path if args.autosave else None,
                     ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_DISPATCH = {
    ("ingest",): cmd_ingest,
    ("suggest",): cmd_suggest,
    ("apply",): cmd_apply,
    ("stats",): cmd_stats,
    ("relations", "import"): cmd_relations_import,
    ("journal", "export"): cmd_journal_export,
    ("micmac",): cmd_micmac,
    ("keys",): cmd_keys,
    ("align", "report"): cmd_align_report,
    ("align", "to-mychoice"): cmd_align_to_mychoice,
    ("align", "to-godet"): cmd_align_to_godet,
    ("attitude",): cmd_attitude,
    ("delphi", "gen"): cmd_delphi_gen,
    ("delphi", "aggregate"): cmd_delphi_aggregate,
    ("delphi", "confirm"): cmd_delphi_confirm,
    ("serve",): cmd_serve,
}


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    key = (args.command,)
    for attr in ("relations_command", "align_command", "delphi_command", "journal_command"):
        nested = getattr(args, attr, None)
        if nested:
            key = (args.command, nested)
    try:
        return _DISPATCH[key](args)
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except WorkbenchError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream consumer (head, less) closed the pipe; not an error
        import os

        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)


if __name__ == "__main__":
    main()
