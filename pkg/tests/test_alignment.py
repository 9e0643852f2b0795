import pytest
from hypothesis import given, strategies as st

from conftest import TS, add_criterion, make_project
from prospect import alignment as al
from prospect import ontology as o
from prospect.errors import ConversionError
from prospect.ontology import Aim, MCriterion, MyChoiceDataset, PropertyInstance


# ---------------------------------------------------------------------------
# Canonical forms: id-free views used as the round-trip oracle
# ---------------------------------------------------------------------------


def canon_dataset(ds: MyChoiceDataset):
    mc_label = {m.id: m.label for m in ds.mcriteria.values()}
    properties = []
    for (aim_id, denomination), instances in ds.property_groups().items():
        aim = ds.aims[aim_id]
        pairs = tuple(sorted(
            (p.value, p.evaluation, p.stakeholder_id, str(p.weight)) for p in instances
        ))
        properties.append((mc_label[aim.mcriterion_id], aim.label, denomination, pairs))
    aims = sorted((mc_label[a.mcriterion_id], a.label) for a in ds.aims.values())
    return (
        tuple(sorted(mc_label.values())),
        tuple(aims),
        tuple(sorted(properties)),
    )


def canon_fragment(fr: al.GodetFragment):
    var_label = {v.id: v.label for v in fr.variables.values()}
    texts: dict[str, list] = {}
    for criterion in fr.criteria:
        texts.setdefault(criterion.concept_id, []).append(
            (criterion.text, criterion.source_id)
        )
    concepts = sorted(
        (
            c.label,
            tuple(sorted(var_label[v] for v in c.variable_ids)),
            tuple(sorted(texts.get(c.id, []))),
        )
        for c in fr.concepts.values()
    )
    return (tuple(sorted(var_label.values())), tuple(concepts))


def bijective_map(dataset: MyChoiceDataset) -> al.AlignmentMap:
    return al.AlignmentMap(
        mcriterion_to_variable={mid: f"v-{mid}" for mid in dataset.mcriteria}
    )


# ---------------------------------------------------------------------------
# Text encoding
# ---------------------------------------------------------------------------


def test_parse_encoded_text():
    assert al.parse_property_text("production costs=mastered(+)") == (
        "production costs", "mastered", "positive",
    )
    assert al.parse_property_text("production costs=fluctuating(-)") == (
        "production costs", "fluctuating", "negative",
    )
    assert al.parse_property_text("labour cost") == ("labour cost", "", "positive")


def test_encode_inverse_of_parse():
    for text in ["a=b(+)", "a=b(-)", "plain phrase", "x=(-)", "a=b=c(+)"]:
        assert al.encode_property_text(*al.parse_property_text(text)) == text


@given(
    st.text(alphabet="abcdefgh ", min_size=1).filter(lambda s: s.strip()),
    st.text(alphabet="abcdefgh ", max_size=10),
    st.sampled_from(["positive", "negative"]),
)
def test_parse_inverse_of_encode(denomination, value, evaluation):
    encoded = al.encode_property_text(denomination, value, evaluation)
    assert al.parse_property_text(encoded) == (denomination, value, evaluation)


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------


def _production_costs_fragment() -> tuple[al.GodetFragment, al.AlignmentMap]:
    project = make_project()
    add_criterion(project, "k1", "production costs=mastered(+)")
    add_criterion(project, "k2", "production costs=fluctuating(-)", source="s2")
    cid = o.create_concept(project, "cost control", concept_id="c1", timestamp=TS)
    vid = o.create_variable(project, "production costs", variable_id="v1", timestamp=TS)
    o.attach_variable(project, cid, vid, timestamp=TS)
    o.assign_criterion(project, "k1", cid, timestamp=TS)
    o.assign_criterion(project, "k2", cid, timestamp=TS)
    amap = al.AlignmentMap(mcriterion_to_variable={"m1": "v1"})
    return al.build_godet_fragment(project), amap


def test_shared_denomination_collapses_into_one_property():
    fragment, amap = _production_costs_fragment()
    result = al.godet_to_mychoice(fragment, amap)
    dataset = result.dataset
    groups = dataset.property_groups()
    assert len(groups) == 1
    ((aim_id, denomination), instances) = next(iter(groups.items()))
    assert denomination == "production costs"
    assert sorted((p.value, p.evaluation) for p in instances) == [
        ("fluctuating", "negative"),
        ("mastered", "positive"),
    ]
    assert len(dataset.aims) == 1
    assert dataset.aims[aim_id].mcriterion_id == "m1"
    assert result.concept_aim_links == [("c1", aim_id)]


def test_single_parent_concept_maps_to_preimage_mcriterion():
    fragment, amap = _production_costs_fragment()
    dataset = al.godet_to_mychoice(fragment, amap).dataset
    assert set(dataset.mcriteria) == {"m1"}
    assert dataset.mcriteria["m1"].label == "production costs"


def test_unresolved_multi_parent_concept_is_an_error_listing_ids():
    fragment, amap = _production_costs_fragment()
    fragment.variables["v2"] = o.Variable(id="v2", label="market")
    fragment.concepts["c1"].variable_ids.add("v2")
    amap.mcriterion_to_variable["m2"] = "v2"
    with pytest.raises(ConversionError) as err:
        al.godet_to_mychoice(fragment, amap)
    assert err.value.offenders == ["c1"]


def test_resolved_multi_parent_drops_exactly_the_other_memberships():
    fragment, amap = _production_costs_fragment()
    fragment.variables["v2"] = o.Variable(id="v2", label="market")
    fragment.concepts["c1"].variable_ids.add("v2")
    amap.mcriterion_to_variable["m2"] = "v2"
    amap.parent_resolutions["c1"] = "v1"
    dataset = al.godet_to_mychoice(fragment, amap).dataset
    back = al.mychoice_to_godet(dataset, amap).fragment
    (concept,) = back.concepts.values()
    assert {back.variables[v].label for v in concept.variable_ids} == {"production costs"}
    # the documented loss: only the v2 membership is gone, the variable and
    # everything else survive
    fragment.concepts["c1"].variable_ids.discard("v2")
    assert canon_fragment(back) == canon_fragment(fragment)


def test_surjectivity_checked_before_converting():
    fragment, amap = _production_costs_fragment()
    fragment.variables["v9"] = o.Variable(id="v9", label="unmapped theme")
    with pytest.raises(ConversionError) as err:
        al.godet_to_mychoice(fragment, amap)
    assert err.value.offenders == ["v9"]


def test_property_with_two_values_becomes_two_criteria():
    dataset = MyChoiceDataset()
    dataset.mcriteria["m1"] = MCriterion(id="m1", label="economy")
    dataset.aims["a1"] = Aim(id="a1", label="cost control", mcriterion_id="m1")
    dataset.properties["p1"] = PropertyInstance(
        id="p1", denomination="production costs", value="mastered",
        evaluation="positive", aim_id="a1", stakeholder_id="s1",
    )
    dataset.properties["p2"] = PropertyInstance(
        id="p2", denomination="production costs", value="fluctuating",
        evaluation="negative", aim_id="a1", stakeholder_id="s1",
    )
    result = al.mychoice_to_godet(dataset, bijective_map(dataset))
    assert len(result.fragment.criteria) == 2
    assert sorted(c.text for c in result.fragment.criteria) == [
        "production costs=fluctuating(-)",
        "production costs=mastered(+)",
    ]


def test_sixteen_mcriteria_combine_into_twelve_variables():
    dataset = MyChoiceDataset()
    for i in range(1, 17):
        mid = f"mc{i:02d}"
        dataset.mcriteria[mid] = MCriterion(id=mid, label=f"axis {i:02d}")
        dataset.aims[f"a{i:02d}"] = Aim(id=f"a{i:02d}", label=f"aim {i:02d}", mcriterion_id=mid)
    from prospect.cli import default_map_payload

    amap = al.AlignmentMap.from_payload(default_map_payload())
    fragment = al.mychoice_to_godet(dataset, amap).fragment
    assert len(fragment.variables) == 12
    assert len(fragment.concepts) == 16


def test_empty_dataset_gives_empty_fragment():
    fragment = al.mychoice_to_godet(MyChoiceDataset(), al.AlignmentMap()).fragment
    assert not fragment.variables and not fragment.concepts and not fragment.criteria


def test_unmapped_mcriterion_is_an_error():
    dataset = MyChoiceDataset()
    dataset.mcriteria["m1"] = MCriterion(id="m1", label="economy")
    with pytest.raises(ConversionError) as err:
        al.mychoice_to_godet(dataset, al.AlignmentMap())
    assert err.value.offenders == ["m1"]


def test_round_trip_a_hand_dataset():
    dataset = MyChoiceDataset()
    dataset.mcriteria["m1"] = MCriterion(id="m1", label="economy")
    dataset.mcriteria["m2"] = MCriterion(id="m2", label="society")
    dataset.aims["a1"] = Aim(id="a1", label="cost control", mcriterion_id="m1")
    dataset.aims["a2"] = Aim(id="a2", label="fair wages", mcriterion_id="m2")
    dataset.properties["p1"] = PropertyInstance(
        id="p1", denomination="production costs", value="mastered",
        evaluation="positive", aim_id="a1", stakeholder_id="s1",
    )
    dataset.properties["p2"] = PropertyInstance(
        id="p2", denomination="wages", value="", evaluation="negative",
        aim_id="a2", stakeholder_id="s2",
    )
    amap = bijective_map(dataset)
    fragment = al.mychoice_to_godet(dataset, amap).fragment
    back = al.godet_to_mychoice(fragment, amap).dataset
    assert canon_dataset(back) == canon_dataset(dataset)


def test_round_trip_b_hand_fragment():
    fragment, amap = _production_costs_fragment()
    dataset = al.godet_to_mychoice(fragment, amap).dataset
    back = al.mychoice_to_godet(dataset, amap).fragment
    assert canon_fragment(back) == canon_fragment(fragment)


def test_criterion_count_law():
    dataset = MyChoiceDataset()
    dataset.mcriteria["m1"] = MCriterion(id="m1", label="economy")
    dataset.aims["a1"] = Aim(id="a1", label="x", mcriterion_id="m1")
    for i, (value, evaluation) in enumerate(
        [("low", "negative"), ("high", "positive"), ("mid", "positive")]
    ):
        dataset.properties[f"p{i}"] = PropertyInstance(
            id=f"p{i}", denomination="margin", value=value, evaluation=evaluation,
            aim_id="a1", stakeholder_id="s1",
        )
    fragment = al.mychoice_to_godet(dataset, bijective_map(dataset)).fragment
    assert len(fragment.criteria) == len(dataset.properties)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def test_alignment_report_table1(table1_path):
    from prospect import store

    project = store.load(table1_path)
    rep = al.alignment_report(project)
    assert (rep.sides.godet.criteria, rep.sides.godet.concepts,
            rep.sides.godet.variables) == (626, 169, 12)
    assert (rep.sides.mychoice.criteria, rep.sides.mychoice.concepts,
            rep.sides.mychoice.variables) == (313, 237, 16)
    assert rep.unmapped_mcriteria == []
    assert rep.unmapped_variables == []
    assert all(e.resolution for e in rep.multi_parent_concepts)
    assert rep.discrepancy_count == 0
    # the shipped example map combines four pairs of criteria
    assert sorted(rep.collapsible_groups) == ["var09", "var10", "var11", "var12"]


def test_alignment_report_zero_discrepancies_on_identical_toys():
    project = make_project()
    vid = o.create_variable(project, "only theme", timestamp=TS)
    cid = o.create_concept(project, "only idea", timestamp=TS)
    o.attach_variable(project, cid, vid, timestamp=TS)
    mid = o.create_mcriterion(project, "only theme", timestamp=TS)
    o.create_aim(project, "only idea", mid, timestamp=TS)
    o.set_alignment(
        project,
        al.AlignmentMap(mcriterion_to_variable={mid: vid}).to_payload(),
        timestamp=TS,
    )
    rep = al.alignment_report(project)
    assert rep.discrepancy_count == 0
    assert rep.multi_parent_concepts == []


def test_alignment_report_lists_exactly_the_unmapped_mcriterion():
    project = make_project()
    vid = o.create_variable(project, "theme", timestamp=TS)
    mapped = o.create_mcriterion(project, "mapped", timestamp=TS)
    orphan = o.create_mcriterion(project, "orphan", timestamp=TS)
    o.set_alignment(
        project,
        al.AlignmentMap(mcriterion_to_variable={mapped: vid}).to_payload(),
        timestamp=TS,
    )
    rep = al.alignment_report(project)
    assert rep.unmapped_mcriteria == [orphan]


def test_map_json_round_trip(tmp_path):
    amap = al.AlignmentMap(
        mcriterion_to_variable={"m1": "v1", "m2": "v1"},
        parent_resolutions={"c9": "v1"},
        concept_aim_links=[("c1", "a1")],
        variable_labels={"v1": "economy"},
    )
    path = tmp_path / "map.json"
    al.save_map(amap, path)
    loaded = al.load_map(path)
    assert loaded == amap
    assert loaded.preimage("v1") == ["m1", "m2"]
