import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import TS, make_project
from prospect import delphi, ontology as o
from prospect.delphi import (
    DelphiBallot,
    VoteResult,
    aggregate,
    ballot_problem,
    confirm_keys,
    generate_questionnaire,
    read_ballots_json,
    submit_ballot,
)
from prospect.errors import ValidationError, VariableSetMismatchError

LABELS6 = {v: f"theme {v}" for v in "abcdef"}


def ballot(respondent: str, picks, round: int = 1) -> DelphiBallot:
    return DelphiBallot(respondent_id=respondent, round=round,
                        chosen_variable_ids=frozenset(picks))


def _twelve_variable_project() -> o.Project:
    project = make_project()
    for i in range(1, 13):
        vid = o.create_variable(project, f"theme {i:02d}", variable_id=f"v{i:02d}",
                                timestamp=TS)
        o.define_modality(project, vid, "mastered", timestamp=TS)
    return project


def test_questionnaire_lists_all_twelve_pick_five():
    project = _twelve_variable_project()
    q = generate_questionnaire(project, k=5)
    assert len(q.options) == 12
    assert q.k == 5
    assert all(option.modalities == ["mastered"] for option in q.options)


def test_questionnaire_k_equals_n_is_a_formality():
    project = _twelve_variable_project()
    q = generate_questionnaire(project, k=12)
    full = ballot("r1", [o.variable_id for o in q.options])
    assert ballot_problem(full, q.variable_ids, q.k) is None


def test_questionnaire_rejects_bad_k():
    project = _twelve_variable_project()
    with pytest.raises(ValidationError):
        generate_questionnaire(project, k=0)
    with pytest.raises(ValidationError):
        generate_questionnaire(project, k=13)


def test_unanimous_ballots_count_three():
    picks = set("abcde")
    result = aggregate([ballot(f"r{i}", picks) for i in range(3)], k=5, labels=LABELS6)
    assert all(result.counts[v] == 3 for v in picks)
    assert result.counts["f"] == 0
    assert result.valid_count == 3


def test_hand_counted_pair_of_ballots():
    # hand count: {a..e} and {b..f} agree on b, c, d, e
    result = aggregate(
        [ballot("r1", "abcde"), ballot("r2", "bcdef")], k=5, labels=LABELS6
    )
    assert result.counts == {"a": 1, "b": 2, "c": 2, "d": 2, "e": 2, "f": 1}
    assert result.ranking[:4] == ["b", "c", "d", "e"]


def test_wrong_size_ballot_rejected_naming_the_rule():
    result = aggregate([ballot("r1", "abcd")], k=5, labels=LABELS6)
    assert result.valid_count == 0
    assert len(result.rejected) == 1
    respondent, reason = result.rejected[0]
    assert respondent == "r1"
    assert "exactly 5" in reason


def test_unknown_variable_rejected():
    result = aggregate([ballot("r1", "abcdz")], k=5, labels=LABELS6)
    assert result.rejected[0][1].startswith("unknown variables")


def test_duplicate_respondent_round_rejected():
    result = aggregate(
        [ballot("r1", "abcde"), ballot("r1", "bcdef")], k=5, labels=LABELS6
    )
    assert result.valid_count == 1
    assert "already voted" in result.rejected[0][1]


def test_other_rounds_are_not_mixed_in():
    result = aggregate(
        [ballot("r1", "abcde", round=1), ballot("r1", "bcdef", round=2)],
        k=5, labels=LABELS6, round=2,
    )
    assert result.total_count == 1
    assert result.counts["f"] == 1


def test_count_sum_law_small():
    ballots = [ballot("r1", "abcde"), ballot("r2", "abcdf"), ballot("r3", "bcdef")]
    result = aggregate(ballots, k=5, labels=LABELS6)
    assert sum(result.counts.values()) == 5 * result.valid_count


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**16 - 1))
def test_aggregation_is_anonymous(seed):
    rng = random.Random(seed)
    universe = list(LABELS6)
    ballots = [
        ballot(f"r{i}", rng.sample(universe, 3), round=1) for i in range(rng.randint(1, 6))
    ]
    result = aggregate(ballots, k=3, labels=LABELS6)
    shuffled = ballots[:]
    rng.shuffle(shuffled)
    again = aggregate(shuffled, k=3, labels=LABELS6)
    assert result.counts == again.counts
    assert result.ranking == again.ranking


def _vote_with_ranking(ranking: list[str]) -> VoteResult:
    counts = {v: len(ranking) - i for i, v in enumerate(ranking)}
    return VoteResult(round=1, k=4, counts=counts, ranking=ranking,
                      labels={v: v for v in ranking}, rejected=[],
                      valid_count=3, total_count=3)


def test_confirm_identical_top_four():
    result = _vote_with_ranking(["a", "b", "c", "d", "e", "f"])
    report = confirm_keys(result, ["a", "b", "c", "d"])
    assert len(report.confirmed) == 4
    assert report.demotions == [] and report.promotions == []


def test_confirm_disjoint_sets():
    result = _vote_with_ranking(["e", "f", "g", "h", "a", "b", "c", "d"])
    report = confirm_keys(result, ["a", "b", "c", "d"])
    assert report.confirmed == []
    assert len(report.demotions) == 4
    assert report.promotions == ["e", "f", "g", "h"]


def test_confirm_one_swap():
    # hand comparison: keys {a,b,c,d}, vote top four {a,b,c,e}
    result = _vote_with_ranking(["a", "b", "c", "e", "d", "f"])
    report = confirm_keys(result, ["a", "b", "c", "d"])
    assert report.confirmed == ["a", "b", "c"]
    assert report.demotions == ["d"]
    assert report.promotions == ["e"]
    assert len(report.demotions) == len(report.promotions)


def test_confirm_requires_same_variable_universe():
    result = _vote_with_ranking(["a", "b"])
    with pytest.raises(VariableSetMismatchError):
        confirm_keys(result, ["a", "z"])


def test_submit_ballot_journals_and_validates():
    project = _twelve_variable_project()
    seq = submit_ballot(project, "r1", 1, ["v01", "v02", "v03", "v04", "v05"], k=5)
    assert project.journal[-1].seq == seq
    assert project.journal[-1].action == "submit_ballot"
    with pytest.raises(ValidationError):
        submit_ballot(project, "r1", 1, ["v01", "v02", "v03", "v04", "v06"], k=5)
    with pytest.raises(ValidationError):
        submit_ballot(project, "r2", 1, ["v01"], k=5)


def test_round_two_feedback_is_round_one_ranking():
    project = _twelve_variable_project()
    for respondent, picks in [
        ("r1", ["v01", "v02", "v03", "v04", "v05"]),
        ("r2", ["v01", "v02", "v03", "v04", "v06"]),
    ]:
        submit_ballot(project, respondent, 1, picks, k=5)
    labels = {vid: v.label for vid, v in project.state.variables.items()}
    round_one = aggregate(project.state.ballots, 5, labels, round=1)
    q2 = generate_questionnaire(project, 5, round=2, prior_ranking=round_one.ranking)
    assert q2.prior_ranking == round_one.ranking
    assert q2.prior_ranking[:4] == ["v01", "v02", "v03", "v04"]


def test_response_rate():
    result = aggregate(
        [ballot("r1", "abcde"), ballot("r2", "abc")], k=5, labels=LABELS6
    )
    assert result.response_rate == 0.5


def test_read_ballots_json(tmp_path):
    path = tmp_path / "ballots.json"
    path.write_text(
        '[{"respondent_id": "r1", "round": 1, "chosen_variable_ids": ["a", "b"]}]'
    )
    ballots = read_ballots_json(path)
    assert ballots == [ballot("r1", ["a", "b"])]
    bad = tmp_path / "bad.json"
    bad.write_text('{"not": "a list"}')
    with pytest.raises(ValidationError):
        read_ballots_json(bad)
