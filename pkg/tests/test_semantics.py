import itertools
import random

import pytest

import oracles
from fskit.algebra import dual_algebra
from fskit.counterexample import frame_x, frame_z
from fskit.formula import parse, variables
from fskit.frame import from_edges, reflexive_closure
from fskit.semantics import (
    BudgetExceeded,
    UnboundVariable,
    axiom_suite,
    evaluate,
    is_valid,
    is_valid_on_algebra,
)
from gens import random_fs_frame

CONNECTION = "dia (p -> q) -> (box p -> dia q)"


def upset_index(alg, nodes):
    mask = 0
    for name in nodes:
        mask |= 1 << alg.base.index(name)
    return alg.element_index(mask)


def test_evaluate_top_and_vacuous_box():
    point = dual_algebra(from_edges(["a"], [], []))
    assert evaluate(parse("T"), point, {}) == point.ops.top
    assert evaluate(parse("box F"), point, {}) == point.ops.top


def test_evaluate_unbound_variable():
    point = dual_algebra(from_edges(["a"], [], []))
    with pytest.raises(UnboundVariable):
        evaluate(parse("p"), point, {})


def test_evaluate_cross_checked_against_pointwise_oracle():
    z = frame_z()
    alg = dual_algebra(z)
    v = {"p": upset_index(alg, ("k0",)), "q": upset_index(alg, ())}
    phi = parse("dia p -> box q")
    got = alg.elements[evaluate(phi, alg, v)]
    valuation = {"p": frozenset({"k0"}), "q": frozenset()}
    expected = oracles.kripke_sat(phi, z, valuation)
    assert frozenset(z.names(got)) == expected


def test_evaluate_agrees_with_kripke_oracle_randomized():
    rng = random.Random(14)
    pool = ["p -> q", "box p & dia q", "dia (p | q) -> dia p | dia q",
            CONNECTION, "(dia p -> box q) -> box (p -> q)", "box (p -> q) -> (box p -> box q)",
            "~p | dia p", "box box p -> box p"]
    for _ in range(60):
        f = random_fs_frame(rng, 4)
        alg = dual_algebra(f)
        phi = parse(rng.choice(pool))
        assignment = {}
        valuation = {}
        for var in variables(phi):
            idx = rng.randrange(len(alg))
            assignment[var] = idx
            valuation[var] = frozenset(alg.element_nodes(idx))
        got = alg.elements[evaluate(phi, alg, assignment)]
        expected = oracles.kripke_sat(phi, f, valuation)
        assert frozenset(f.names(got)) == expected
        # pointwise satisfaction sets stay upward closed
        assert all(
            y in expected
            for x in expected
            for y in f.nodes
            if f.le(x, y)
        )


def test_connection_axiom_valid_on_z():
    result = is_valid(parse(CONNECTION), frame_z())
    assert result.valid and result.counter_assignment is None


def test_validity_on_z_matches_exhaustive_kripke_sweep():
    # independent sweep: all 45x45 upset valuations through the pointwise
    # evaluator, for one valid and one invalid scheme
    z = frame_z()
    upsets = [frozenset(s) for s in oracles.upsets_oracle(z)]
    everything = frozenset(z.nodes)
    for text, expected in ((CONNECTION, True), ("box p -> p", False)):
        phi = parse(text)
        swept = all(
            oracles.kripke_sat(phi, z, {"p": u, "q": v}) == everything
            for u in upsets
            for v in upsets
        )
        assert swept == expected
        assert is_valid(phi, z).valid == expected


def test_box_t_invalid_on_z_with_checkable_counterexample():
    z = frame_z()
    result = is_valid(parse("box p -> p"), z)
    assert not result.valid
    alg = dual_algebra(z)
    assignment = {var: upset_index(alg, nodes) for var, nodes in result.counter_assignment.items()}
    assert evaluate(parse("box p -> p"), alg, assignment) != alg.ops.top


def test_bot_invalid_with_empty_assignment():
    result = is_valid(parse("F"), frame_z())
    assert not result.valid
    assert result.counter_assignment == {}


def test_counter_assignment_is_canonical_first():
    z = frame_z()
    alg = dual_algebra(z)
    phi = parse("box p -> q")
    result = is_valid_on_algebra(phi, alg)
    assert not result.valid
    names = sorted(variables(phi))
    got = tuple(upset_index(alg, result.counter_assignment[v]) for v in names)
    expected = next(
        assign
        for assign in itertools.product(range(len(alg)), repeat=len(names))
        if evaluate(phi, alg, dict(zip(names, assign))) != alg.ops.top
    )
    assert got == expected


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        is_valid(parse("p -> q"), frame_z(), budget=100)


def test_axiom_suite_ik_on_z():
    assert axiom_suite(frame_z(), "IK").passed


def test_axiom_suite_ikt_on_reflexive_x():
    assert axiom_suite(reflexive_closure(frame_x()), "IKT").passed


def test_axiom_suite_ikt_fails_on_z():
    suite = axiom_suite(frame_z(), "IKT")
    assert not suite.passed
    assert not suite["box_t"].valid


def test_axiom_suite_unknown_logic():
    with pytest.raises(ValueError):
        axiom_suite(frame_z(), "S5")


def test_soundness_on_random_fs_frames():
    rng = random.Random(20)
    for _ in range(30):
        f = random_fs_frame(rng, 4)
        assert axiom_suite(f, "IK").passed


def test_correspondence_small_sample():
    # the classification/axiom correspondence is exact on frames that also
    # satisfy the mixed condition (all the frames this toolkit ships do)
    rng = random.Random(33)
    from fskit.frame import classify
    from gens import random_fs_space
    for _ in range(40):
        f = random_fs_space(rng, 4)
        reports = classify(f)
        assert reports["REFLEXIVE"].holds == axiom_suite(f, "IKT").passed
        assert reports["TRANSITIVE"].holds == axiom_suite(f, "IK4").passed
        assert reports["PREORDER"].holds == axiom_suite(f, "IS4").passed


def test_correspondence_boundary_without_mixed_condition():
    # With F1 and F2 alone the right-to-left direction genuinely fails:
    # this chain validates both IKT schemes although R is not reflexive
    # (upset valuations are too coarse to see the missing loop at n0).
    # The mixed condition restores the equivalence.
    f = from_edges(
        ["n0", "n1", "n2"],
        [("n0", "n1"), ("n1", "n2")],
        [("n0", "n2"), ("n1", "n0"), ("n1", "n1"), ("n1", "n2"), ("n2", "n2")],
    )
    from fskit.frame import check_mixed, classify, is_fs_frame
    assert is_fs_frame(f).holds
    assert not check_mixed(f).holds
    assert not classify(f)["REFLEXIVE"].holds
    assert axiom_suite(f, "IKT").passed
