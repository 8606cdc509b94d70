"""Seeded random structure generators shared by the test modules.

Frames come from random posets (edges only from lower to higher index, so
antisymmetry is free) with random R, repaired towards the required
conditions by adding the R edges a failing witness demands; each repair
step grows R, so the loop terminates.  Formations come from duplicating
base nodes: the projection of such a lift is a surjective morphism in
both the FS and the IK sense by construction, and the lift preserves
every frame condition used here.
"""

from __future__ import annotations

import random

from fskit.amalgam import CoVFormation
from fskit.frame import Frame, check_f1, check_f2, check_ik_compatibility, check_mixed, classify, from_edges
from fskit.morphism import FrameMap, identity


def random_poset_edges(rng: random.Random, n: int, density: float = 0.3):
    nodes = [f"n{i}" for i in range(n)]
    le_gen = [
        (nodes[i], nodes[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < density
    ]
    return nodes, le_gen


def random_frame(rng: random.Random, n: int, r_density: float = 0.2) -> Frame:
    nodes, le_gen = random_poset_edges(rng, n)
    r_edges = [
        (a, b)
        for a in nodes
        for b in nodes
        if rng.random() < r_density
    ]
    return from_edges(nodes, le_gen, r_edges)


def _repair(f: Frame, want_mixed: bool) -> Frame:
    """Add the R edges failing witnesses ask for until the conditions hold."""
    r = set(f.r_pairs())
    while True:
        g = from_edges(f.nodes, [p for p in f.le_pairs() if p[0] != p[1]], sorted(r))
        report = check_f1(g)
        if not report.holds:
            _, xp, y = report.witness
            r.add((xp, y))
            continue
        report = check_f2(g)
        if not report.holds:
            x, _, yp = report.witness
            r.add((x, yp))
            continue
        if want_mixed:
            report = check_mixed(g)
            if not report.holds:
                r.add(report.witness)
                continue
        return g


def random_fs_frame(rng: random.Random, max_nodes: int = 5) -> Frame:
    """A random frame satisfying F1 and F2, with occasional closures of R
    to vary the reflexive/transitive mix."""
    n = rng.randint(1, max_nodes)
    f = _repair(random_frame(rng, n), want_mixed=False)
    roll = rng.random()
    if roll < 0.25:
        f = _reflexive(f)
    elif roll < 0.45:
        f = _transitive(f)
    elif roll < 0.55:
        f = _transitive(_reflexive(f))
    return f


def random_fs_space(rng: random.Random, max_nodes: int = 4) -> Frame:
    """F1, F2 and the mixed condition; same closure mixing as above.

    Closures run before the final repair because repair can add edges that
    break a closure property, while repair added last always lands on a
    frame satisfying all three space conditions.
    """
    n = rng.randint(1, max_nodes)
    f = random_frame(rng, n)
    roll = rng.random()
    if roll < 0.25:
        f = _reflexive(f)
    elif roll < 0.45:
        f = _transitive(f)
    elif roll < 0.55:
        f = _transitive(_reflexive(f))
    return _repair(f, want_mixed=True)


def _reflexive(f: Frame) -> Frame:
    r = set(f.r_pairs()) | {(x, x) for x in f.nodes}
    return from_edges(f.nodes, [p for p in f.le_pairs() if p[0] != p[1]], sorted(r))


def _transitive(f: Frame) -> Frame:
    r = set(f.r_pairs())
    changed = True
    while changed:
        changed = False
        for a, b in list(r):
            for c, d in list(r):
                if b == c and (a, d) not in r:
                    r.add((a, d))
                    changed = True
    return from_edges(f.nodes, [p for p in f.le_pairs() if p[0] != p[1]], sorted(r))


def _compat_close(f: Frame, r: set) -> set:
    le = set(f.le_pairs())
    return {
        (x, w)
        for x in f.nodes
        for w in f.nodes
        if any((x, z) in le and (z, t) in r and (t, w) in le for z, t in r)
    }


def random_ik_class_frame(rng: random.Random, cls: str, max_nodes: int = 4) -> Frame:
    """A random iK-frame (R = le;R;le) in the given class iT / iK4 / iS4."""
    n = rng.randint(1, max_nodes)
    nodes, le_gen = random_poset_edges(rng, n)
    base = from_edges(nodes, le_gen, [])
    r = {(a, b) for a in nodes for b in nodes if rng.random() < 0.2}
    if cls in ("iT", "iS4"):
        r |= set(base.le_pairs())
    r = _compat_close(base, r)
    f = from_edges(nodes, [p for p in base.le_pairs() if p[0] != p[1]], sorted(r))
    if cls in ("iK4", "iS4"):
        f = _transitive(f)
    assert check_ik_compatibility(f).holds
    predicate = {"iT": "REFLEXIVE", "iK4": "TRANSITIVE", "iS4": "PREORDER"}[cls]
    assert classify(f)[predicate].holds
    return f


def copy_lift(
    rng: random.Random, base: Frame, max_copies: int = 2, max_total: int | None = None
) -> tuple[Frame, FrameMap]:
    """Duplicate each base node 1..max_copies times; distinct copies of a
    node stay incomparable, everything else is inherited pointwise.  The
    projection back onto the base is surjective and satisfies all the
    morphism conditions in both modes."""
    copies = {x: 1 for x in base.nodes}
    budget = (max_total - len(base.nodes)) if max_total is not None else len(base.nodes)
    for x in base.nodes:
        if budget <= 0:
            break
        extra = rng.randint(0, max_copies - 1)
        extra = min(extra, budget)
        copies[x] += extra
        budget -= extra
    names = [f"{x}.{k}" for x in base.nodes for k in range(copies[x])]
    le_gen = []
    r_edges = []
    for x in base.nodes:
        for y in base.nodes:
            for i in range(copies[x]):
                for j in range(copies[y]):
                    if x != y and base.le(x, y):
                        le_gen.append((f"{x}.{i}", f"{y}.{j}"))
                    if base.r(x, y):
                        r_edges.append((f"{x}.{i}", f"{y}.{j}"))
    lifted = from_edges(names, le_gen, r_edges)
    projection = FrameMap(lifted, base, {f"{x}.{k}": x for x in base.nodes for k in range(copies[x])})
    return lifted, projection


def lift_formation(
    rng: random.Random, base: Frame, mode: str = "FS", max_total: int | None = None
) -> CoVFormation:
    left, fmap = copy_lift(rng, base, max_total=max_total)
    right, gmap = copy_lift(rng, base, max_total=max_total)
    return CoVFormation(base, left, right, fmap, gmap, mode)


def identity_formation(f: Frame, mode: str = "FS") -> CoVFormation:
    return CoVFormation(f, f, f, identity(f), identity(f), mode)


def random_fs_formation(rng: random.Random, max_nodes: int = 3) -> CoVFormation:
    return lift_formation(rng, random_fs_space(rng, max_nodes), "FS")


def random_ik_formation(
    rng: random.Random, cls: str, max_nodes: int = 4, max_total: int | None = None
) -> CoVFormation:
    return lift_formation(rng, random_ik_class_frame(rng, cls, max_nodes), "IK", max_total)
