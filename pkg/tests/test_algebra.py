import random

import pytest

import oracles
from fskit.algebra import (
    FiniteAlgebra,
    ModalFilter,
    NotAModalFilter,
    NotAnFsFrame,
    SizeBoundExceeded,
    check_fs_algebra,
    congruence_filter_bijection_check,
    dual_algebra,
    enumerate_fs_congruences,
    enumerate_modal_filters,
    is_modal_filter,
    modal_filter_generated,
    partition_key,
    quotient_by_modal_filter,
    theta_classes,
    upset_masks,
)
from fskit.counterexample import frame_z
from fskit.frame import bits, from_edges
from gens import random_fs_frame


def boolean2(box=(0, 1), dia=(0, 1)) -> FiniteAlgebra:
    return FiniteAlgebra(
        2,
        meet=[[0, 0], [0, 1]],
        join=[[0, 1], [1, 1]],
        himp=[[1, 1], [0, 1]],
        bot=0,
        top=1,
        box=list(box),
        dia=list(dia),
    )


def test_dual_algebra_of_z_has_45_elements():
    alg = dual_algebra(frame_z())
    assert len(alg) == 45
    assert len(oracles.upsets_oracle(frame_z())) == 45
    # component decomposition: 9 upsets over {z0,z2,k3,k4} x 5 over {z1,k0,k2}
    assert 9 * 5 == 45


def test_dual_algebra_elements_match_oracle():
    rng = random.Random(2)
    for _ in range(15):
        f = random_fs_frame(rng, 5)
        alg = dual_algebra(f)
        expected = {frozenset(s) for s in oracles.upsets_oracle(f)}
        got = {frozenset(alg.element_nodes(i)) for i in range(len(alg))}
        assert got == expected


def test_element_order_is_cardinality_then_membership():
    f = from_edges(["a", "b"], [], [])
    alg = dual_algebra(f)
    assert [alg.element_nodes(i) for i in range(4)] == [(), ("a",), ("b",), ("a", "b")]


def test_one_point_empty_r_modalities():
    f = from_edges(["a"], [], [])
    alg = dual_algebra(f)
    ops = alg.ops
    assert ops.size == 2
    assert ops.box[ops.bot] == ops.top  # no successors: box F = T
    assert ops.dia[ops.top] == ops.bot  # no successors: dia T = F


def test_discrete_antichain_himp_is_boolean():
    f = from_edges(["a", "b"], [], [])
    alg = dual_algebra(f)
    full = f.full_mask()
    for i, u in enumerate(alg.elements):
        for j, v in enumerate(alg.elements):
            expected = (~u & full) | v
            assert alg.elements[alg.ops.himp[i][j]] == expected


def test_dual_algebra_requires_fs_frame():
    bad = from_edges(["a", "b", "c"], [("a", "b")], [("a", "c")])
    # F1 fails: a <= b, a R c, but b has no R-successor above c
    with pytest.raises(NotAnFsFrame):
        dual_algebra(bad)


def test_dual_of_z_passes_axioms():
    assert check_fs_algebra(dual_algebra(frame_z()).ops).holds


def test_dual_algebras_of_random_fs_frames_pass_axioms():
    rng = random.Random(41)
    for _ in range(25):
        f = random_fs_frame(rng, 5)
        assert check_fs_algebra(dual_algebra(f).ops).holds


def test_boolean_identity_modalities_pass():
    assert check_fs_algebra(boolean2()).holds


def test_broken_dia_bot_fails_axiom():
    report = check_fs_algebra(boolean2(dia=(1, 1)))
    assert not report.holds
    assert not report["dia_bot"].holds


def test_heyting_residuation_on_dual_algebras():
    rng = random.Random(19)
    for _ in range(10):
        f = random_fs_frame(rng, 4)
        alg = dual_algebra(f)
        for w in alg.elements:
            for i, u in enumerate(alg.elements):
                for j, v in enumerate(alg.elements):
                    himp = alg.elements[alg.ops.himp[i][j]]
                    assert (w & himp == w) == (w & u & ~v == 0)


def test_modal_filter_generated_empty_seed():
    alg = dual_algebra(frame_z()).ops
    assert modal_filter_generated(alg, []).members == frozenset({alg.top})


def test_modal_filter_box_identity_gives_principal_filter():
    alg = boolean2()
    flt = modal_filter_generated(alg, [0])
    assert flt.members == frozenset({0, 1})
    flt = modal_filter_generated(alg, [1])
    assert flt.members == frozenset({1})


def test_modal_filter_generated_matches_saturation_oracle():
    alg = dual_algebra(frame_z()).ops
    rng = random.Random(4)
    for _ in range(12):
        seed = [rng.randrange(alg.size)]
        got = modal_filter_generated(alg, seed).members
        assert got == oracles.modal_filter_saturation_oracle(alg, seed)
        ok, _ = is_modal_filter(alg, got)
        assert ok


def test_fil_box_minimality():
    rng = random.Random(9)
    for _ in range(10):
        f = random_fs_frame(rng, 3)
        alg = dual_algebra(f).ops
        if alg.size > 10:
            continue
        filters = enumerate_modal_filters(alg)
        for a in range(alg.size):
            generated = modal_filter_generated(alg, [a]).members
            assert a in generated
            ok, _ = is_modal_filter(alg, generated)
            assert ok
            for flt in filters:
                if a in flt:
                    assert generated <= flt


def test_quotient_by_trivial_filter_is_isomorphic():
    alg = dual_algebra(frame_z()).ops
    quotient, projection = quotient_by_modal_filter(alg, ModalFilter(alg, frozenset({alg.top})))
    assert quotient.size == alg.size
    assert sorted(projection) == sorted(range(alg.size))


def test_quotient_by_whole_algebra_is_trivial():
    alg = dual_algebra(frame_z()).ops
    quotient, projection = quotient_by_modal_filter(alg, ModalFilter(alg, frozenset(range(alg.size))))
    assert quotient.size == 1
    assert set(projection) == {0}


def test_quotient_of_dual_z_by_generated_filter():
    alg = dual_algebra(frame_z()).ops
    rng = random.Random(77)
    for _ in range(6):
        flt = modal_filter_generated(alg, [rng.randrange(alg.size)])
        quotient, projection = quotient_by_modal_filter(alg, flt)
        assert check_fs_algebra(quotient).holds
        # independent class count: pairwise equivalence via the filter
        classes = set()
        for a in range(alg.size):
            rep = min(
                b for b in range(alg.size)
                if alg.himp[a][b] in flt.members and alg.himp[b][a] in flt.members
            )
            classes.add(rep)
        assert quotient.size == len(classes)
        # kernel of the projection is the filter itself
        top_class = projection[alg.top]
        assert frozenset(a for a in range(alg.size) if projection[a] == top_class) == flt.members


def test_quotient_rejects_non_filter():
    alg = boolean2()
    with pytest.raises(NotAModalFilter):
        quotient_by_modal_filter(alg, ModalFilter(alg, frozenset({0})))


def test_bijection_on_two_element_algebra():
    report = congruence_filter_bijection_check(boolean2())
    assert report.holds
    assert report.filter_count == 2
    assert report.congruence_count == 2


def test_bijection_on_dual_of_two_chain():
    f = from_edges(["a", "b"], [("a", "b")], [])
    report = congruence_filter_bijection_check(dual_algebra(f).ops)
    assert report.holds
    assert report.filter_count == report.congruence_count


def test_bijection_on_three_node_frame():
    f = from_edges(["a", "b", "c"], [("a", "b")], [("a", "c"), ("b", "c")])
    alg = dual_algebra(f).ops
    report = congruence_filter_bijection_check(alg)
    assert report.holds


def test_bijection_size_bound():
    alg = dual_algebra(frame_z()).ops
    with pytest.raises(SizeBoundExceeded):
        congruence_filter_bijection_check(alg)


def test_congruence_enumeration_matches_partition_oracle():
    rng = random.Random(8)
    for _ in range(8):
        f = random_fs_frame(rng, 3)
        alg = dual_algebra(f).ops
        if alg.size > 6:
            continue
        got = set(enumerate_fs_congruences(alg))
        expected = oracles.congruences_oracle(alg)
        assert got == expected


def test_theta_classes_partition():
    alg = dual_algebra(frame_z()).ops
    flt = modal_filter_generated(alg, [0])
    classes = theta_classes(alg, flt.members)
    seen = [a for cls in classes for a in cls]
    assert sorted(seen) == list(range(alg.size))


def test_box_along_composite_agrees_with_plain_r_on_compatible_frames():
    # box is taken along (<= ; R); when R = (<= ; R ; <=) the two agree
    rng = random.Random(3)
    from fskit.frame import check_ik_compatibility
    for _ in range(20):
        f = random_fs_frame(rng, 4)
        closed = {
            (a, b)
            for a in f.nodes
            for b in f.nodes
            if any(f.le(a, z) and f.r(z, t) and f.le(t, b) for z in f.nodes for t in f.nodes)
        }
        g = from_edges(f.nodes, [p for p in f.le_pairs() if p[0] != p[1]], sorted(closed))
        assert check_ik_compatibility(g).holds
        from fskit.frame import is_fs_frame
        if not is_fs_frame(g).holds:
            continue
        alg = dual_algebra(g)
        for i, u in enumerate(alg.elements):
            plain = 0
            for x in range(len(g)):
                if not g.rsucc[x] & ~u:
                    plain |= 1 << x
            assert alg.elements[alg.ops.box[i]] == plain


def test_upset_masks_are_upsets():
    rng = random.Random(6)
    for _ in range(10):
        f = random_fs_frame(rng, 5)
        for mask in upset_masks(f):
            for i in bits(mask):
                assert f.up[i] & ~mask == 0
