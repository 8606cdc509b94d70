import json

from fskit import frame as fr
from fskit import morphism as mo
from fskit.amalgam import CoVFormation, RefutationCertificate, chase_refute, validate_formation
from fskit.counterexample import (
    frame_x,
    frame_y,
    frame_z,
    paper_formation,
    reflexive_variant,
    run_paper_demo,
)
from fskit.frame import classify
from fskit.morphism import FrameMap


def test_node_inventory():
    c = paper_formation()
    assert len(c.left) == 8 and len(c.right) == 8 and len(c.base) == 7


def test_paper_formation_validates():
    assert validate_formation(paper_formation()).holds


def test_maps_cover_base():
    c = paper_formation()
    assert c.fmap("a0") == "k0" == c.gmap("b1") == c.gmap("b0")
    assert c.gmap("b2") == "k2" == c.fmap("a1") == c.fmap("a2")
    assert {c.fmap(x) for x in c.left.nodes} == set(c.base.nodes)
    assert {c.gmap(y) for y in c.right.nodes} == set(c.base.nodes)


def test_embedded_data_round_trips_bit_exactly():
    c = paper_formation()
    for f in (c.base, c.left, c.right):
        blob = json.dumps(fr.to_doc(f), indent=2)
        assert fr.from_doc(json.loads(blob)) == f
        assert json.dumps(fr.to_doc(fr.from_doc(json.loads(blob))), indent=2) == blob
    for m in (c.fmap, c.gmap):
        blob = json.dumps(mo.to_doc(m), indent=2)
        assert mo.from_doc(json.loads(blob)) == m
        assert json.dumps(mo.to_doc(mo.from_doc(json.loads(blob))), indent=2) == blob


def test_reflexive_variant_properties():
    v = reflexive_variant()
    assert validate_formation(v).holds
    for f in (v.base, v.left, v.right):
        assert classify(f)["REFLEXIVE"].holds
    assert isinstance(chase_refute(v), RefutationCertificate)


def test_base_frames_transitive_and_wellfounded():
    for f in (frame_z(), frame_x(), frame_y()):
        reports = classify(f)
        assert reports["TRANSITIVE"].holds and reports["IGL_WF"].holds


def test_demo_all_green_with_expected_chase_shape():
    report = run_paper_demo()
    assert report.ok
    by_step = {s.step: s for s in report.steps}
    cert = by_step["chase-base"].details
    assert cert["created_elements"] == 4
    assert cert["case_splits"] == 0
    # the doomed element held exactly the pair (a0, b2) before the final
    # commutation pruning, whose base values disagree
    assert cert["contradiction"]["removed"] == [["a0", "b2"]]
    assert cert["contradiction"]["cause"] == "commutation"
    assert cert["contradiction"]["left_base"] == "k0"
    assert cert["contradiction"]["right_base"] == "k2"


def test_demo_is_deterministic():
    assert run_paper_demo().to_json() == run_paper_demo().to_json()


def test_sabotaged_demo_goes_red_but_continues():
    c = paper_formation()
    x = c.left
    r = [pair for pair in x.r_pairs() if pair != ("a3", "a0")]
    broken_left = fr.from_edges(x.nodes, [p for p in x.le_pairs() if p[0] != p[1]], r)
    broken = CoVFormation(
        c.base, broken_left, c.right,
        FrameMap(broken_left, c.base, c.fmap.table()), c.gmap, "FS",
    )
    report = run_paper_demo(formation=broken)
    assert not report.ok
    by_step = {s.step: s.status for s in report.steps}
    assert by_step["frame-x-fs-space"] == "fail"
    assert by_step["frame-z-fs-space"] == "pass"
    # later steps still ran
    assert "pullback-not-coamalgam" in by_step
    assert by_step["chase-base"] == "fail"


def test_demo_table_rendering():
    table = run_paper_demo().render_table()
    assert "PASS" in table and "chase-base" in table
    assert table.strip().endswith("all steps passed")


def test_demo_json_shape():
    doc = run_paper_demo().to_doc()
    assert isinstance(doc, list)
    for entry in doc:
        assert set(entry) == {"step", "paper_ref", "status", "details"}
