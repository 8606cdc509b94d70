"""Co-V-formations: validation, pullbacks, and chase refutation.

The chase is a sound saturation procedure over a hypothetical co-amalgam
(W, p1, p2) of a formation (base, left, right, f, g).  Abstract elements
of W carry pair domains: the candidate values of (p1(w), p2(w)).  Create
rules instantiate conditions any co-amalgam must satisfy (surjectivity,
the back conditions of the morphisms, the frame confluence conditions);
prune rules delete pairs without relational support along asserted facts
and pairs on which the square would fail to commute.  An emptied domain
therefore refutes co-amalgams of every cardinality.  Budget exhaustion or
a quiescent state is reported as Inconclusive, never as evidence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import frame as fr
from . import morphism as mo
from .algebra import FiniteAlgebra
from .errors import FskitError
from .frame import ConditionReport, Frame, FrameCheck, bits, classify, check_ik_compatibility, is_fs_space_finite
from .morphism import FrameMap, MorphismReport, SourceTargetMismatch, check_fs_morphism, check_ik_morphism, is_surjective

MODES = ("FS", "IK")


class FormationInvalid(FskitError):
    pass


class PreconditionFailed(FskitError):
    pass


@dataclass(frozen=True, slots=True)
class CoVFormation:
    """Two maps onto a common base frame; the input to co-amalgam search."""

    base: Frame
    left: Frame
    right: Frame
    fmap: FrameMap
    gmap: FrameMap
    mode: str = "FS"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.fmap.source != self.left or self.fmap.target != self.base:
            raise SourceTargetMismatch("fmap must map the left frame to the base")
        if self.gmap.source != self.right or self.gmap.target != self.base:
            raise SourceTargetMismatch("gmap must map the right frame to the base")


@dataclass(frozen=True, slots=True)
class AggregateReport:
    """Named sub-checks with an overall verdict."""

    name: str
    entries: tuple[tuple[str, bool, Any], ...]

    @property
    def holds(self) -> bool:
        return all(ok for _, ok, _ in self.entries)

    def first_failure(self) -> str | None:
        for label, ok, _ in self.entries:
            if not ok:
                return label
        return None

    def to_doc(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "holds": self.holds,
            "entries": [{"check": label, "holds": ok, "detail": detail} for label, ok, detail in self.entries],
        }


def _mode_frame_check(f: Frame, mode: str) -> FrameCheck:
    if mode == "FS":
        return is_fs_space_finite(f)
    report = check_ik_compatibility(f)
    return FrameCheck(report.holds, (report,))


def _mode_morphism_check(m: FrameMap, mode: str) -> MorphismReport:
    return check_fs_morphism(m) if mode == "FS" else check_ik_morphism(m)


def validate_formation(c: CoVFormation, mode: str | None = None) -> AggregateReport:
    """Frame checks on all three frames, morphism and surjectivity checks
    on both maps, under the given mode (defaults to the formation's)."""
    mode = mode or c.mode
    entries: list[tuple[str, bool, Any]] = []
    for label, f in (("base", c.base), ("left", c.left), ("right", c.right)):
        check = _mode_frame_check(f, mode)
        entries.append((f"frame:{label}", check.holds, check.to_doc()))
    for label, m in (("f", c.fmap), ("g", c.gmap)):
        report = _mode_morphism_check(m, mode)
        entries.append((f"morphism:{label}", report.holds, report.to_doc()))
        surj, missing = is_surjective(m)
        entries.append((f"surjective:{label}", surj, {"uncovered": list(missing)}))
    return AggregateReport(f"formation[{mode}]", tuple(entries))


def check_coamalgam(
    c: CoVFormation,
    w: Frame,
    p1: FrameMap,
    p2: FrameMap,
    mode: str | None = None,
) -> AggregateReport:
    """Is (w, p1, p2) a co-amalgam: mode frame check on w, surjective
    mode-morphisms, and commutation f(p1(x)) = g(p2(x))."""
    mode = mode or c.mode
    if p1.source != w or p1.target != c.left:
        raise SourceTargetMismatch("p1 must map the candidate frame to the left frame")
    if p2.source != w or p2.target != c.right:
        raise SourceTargetMismatch("p2 must map the candidate frame to the right frame")

    entries: list[tuple[str, bool, Any]] = []
    check = _mode_frame_check(w, mode)
    entries.append(("frame:candidate", check.holds, check.to_doc()))
    for label, m in (("p1", p1), ("p2", p2)):
        report = _mode_morphism_check(m, mode)
        entries.append((f"morphism:{label}", report.holds, report.to_doc()))
        surj, missing = is_surjective(m)
        entries.append((f"surjective:{label}", surj, {"uncovered": list(missing)}))

    commute_witness = None
    for x in w.nodes:
        if c.fmap(p1(x)) != c.gmap(p2(x)):
            commute_witness = x
            break
    entries.append(
        ("commutes", commute_witness is None,
         {"witness": commute_witness})
    )
    return AggregateReport(f"coamalgam[{mode}]", tuple(entries))


# --- pullback ---

def pullback(c: CoVFormation) -> tuple[Frame, FrameMap, FrameMap]:
    """Pairs with equal images under f and g, ordered pointwise."""
    pairs = [
        (a, b)
        for a in range(len(c.left))
        for b in range(len(c.right))
        if c.fmap.img[a] == c.gmap.img[b]
    ]
    names = [f"({c.left.nodes[a]},{c.right.nodes[b]})" for a, b in pairs]
    n = len(pairs)
    up = [0] * n
    rsucc = [0] * n
    for i, (a, b) in enumerate(pairs):
        for j, (a2, b2) in enumerate(pairs):
            if c.left.up[a] >> a2 & 1 and c.right.up[b] >> b2 & 1:
                up[i] |= 1 << j
            if c.left.rsucc[a] >> a2 & 1 and c.right.rsucc[b] >> b2 & 1:
                rsucc[i] |= 1 << j
    pb = Frame(names, up, rsucc)
    proj1 = FrameMap(pb, c.left, {names[i]: c.left.nodes[a] for i, (a, b) in enumerate(pairs)})
    proj2 = FrameMap(pb, c.right, {names[i]: c.right.nodes[b] for i, (a, b) in enumerate(pairs)})
    return pb, proj1, proj2


CLASS_PREDICATES = {"iT": "REFLEXIVE", "iK4": "TRANSITIVE", "iS4": "PREORDER"}


def check_pullback_properties(c: CoVFormation, logic_class: str) -> AggregateReport:
    """For a formation of iT/iK4/iS4 frames: the pullback stays in the
    class and its projections are surjective iK-morphisms commuting with
    the formation."""
    if logic_class not in CLASS_PREDICATES:
        raise ValueError(f"logic_class must be one of {tuple(CLASS_PREDICATES)}")
    predicate = CLASS_PREDICATES[logic_class]

    formation = validate_formation(c, "IK")
    if not formation.holds:
        raise FormationInvalid(f"formation fails {formation.first_failure()}")
    for label, f in (("base", c.base), ("left", c.left), ("right", c.right)):
        report = classify(f)[predicate]
        if not report.holds:
            raise FormationInvalid(f"{label} frame is not {predicate.lower()}")

    pb, proj1, proj2 = pullback(c)
    entries: list[tuple[str, bool, Any]] = []
    compat = check_ik_compatibility(pb)
    entries.append(("pullback:ik_compatible", compat.holds, compat.to_doc()))
    cls = classify(pb)[predicate]
    entries.append((f"pullback:{predicate.lower()}", cls.holds, cls.to_doc()))
    for label, proj in (("p1", proj1), ("p2", proj2)):
        report = check_ik_morphism(proj)
        entries.append((f"morphism:{label}", report.holds, report.to_doc()))
        surj, missing = is_surjective(proj)
        entries.append((f"surjective:{label}", surj, {"uncovered": list(missing)}))
    commute = all(c.fmap(proj1(x)) == c.gmap(proj2(x)) for x in pb.nodes)
    entries.append(("commutes", commute, {}))
    return AggregateReport(f"pullback[{logic_class}]", tuple(entries))


# --- chase refutation ---

@dataclass(frozen=True, slots=True)
class Inconclusive:
    """The chase stopped without a refutation; carries the stop reason."""

    reason: str


@dataclass(frozen=True, slots=True)
class RefutationCertificate:
    """A replayable trace ending in an emptied pair domain.

    `created_elements` counts the elements of the trace; when case splits
    occurred, branch traces are nested inside SPLIT steps and the
    contradiction shown is the first branch's.
    """

    mode: str
    steps: tuple[dict[str, Any], ...]
    contradiction: dict[str, Any]
    created_elements: int
    case_splits: int

    def to_doc(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "steps": list(self.steps),
            "contradiction": dict(self.contradiction),
            "created_elements": self.created_elements,
            "case_splits": self.case_splits,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), indent=2)


_CONDITION_LABELS = {
    "SEED": "surjectivity of the projections",
    "LE_BACK": "back condition of the order p-morphism",
    "WEAK_BACK": "weak back condition for R",
    "STRONG_BACK": "strong back condition combining the order and R",
    "R_BOUNDED_BACK": "bounded back condition for R",
    "F1": "frame confluence condition F1",
    "F2": "frame confluence condition F2",
    "SPLIT": "case distinction over a pair domain",
}


class _Contradiction(Exception):
    def __init__(self, element: int, removed: list[tuple[int, int]], cause: str):
        self.element = element
        self.removed = sorted(removed)
        self.cause = cause


class _Ctx:
    """Formation constants shared by all chase states."""

    def __init__(self, c: CoVFormation):
        self.c = c
        self.mode = c.mode
        self.left = c.left
        self.right = c.right
        self.f_img = c.fmap.img
        self.g_img = c.gmap.img
        self.nl = len(c.left)
        self.nr = len(c.right)
        self.all_pairs = frozenset((a, b) for a in range(self.nl) for b in range(self.nr))


class _State:
    def __init__(self, ctx: _Ctx):
        self.ctx = ctx
        self.domains: list[set[tuple[int, int]]] = []
        self.le_facts: list[tuple[int, int]] = []
        self.r_facts: list[tuple[int, int]] = []
        self.le_set: set[tuple[int, int]] = set()
        self.r_set: set[tuple[int, int]] = set()
        self.steps: list[dict[str, Any]] = []
        self.fired: set[tuple] = set()

    def copy(self) -> "_State":
        out = _State(self.ctx)
        out.domains = [set(d) for d in self.domains]
        out.le_facts = list(self.le_facts)
        out.r_facts = list(self.r_facts)
        out.le_set = set(self.le_set)
        out.r_set = set(self.r_set)
        out.steps = list(self.steps)
        out.fired = set(self.fired)
        return out

    def new_element(self, domain: Iterable[tuple[int, int]]) -> int:
        self.domains.append(set(domain))
        return len(self.domains) - 1

    def add_le(self, u: int, v: int) -> None:
        if (u, v) not in self.le_set:
            self.le_set.add((u, v))
            self.le_facts.append((u, v))

    def add_r(self, u: int, v: int) -> None:
        if (u, v) not in self.r_set:
            self.r_set.add((u, v))
            self.r_facts.append((u, v))

    def left_vals(self, e: int) -> set[int]:
        return {a for a, _ in self.domains[e]}

    def right_vals(self, e: int) -> set[int]:
        return {b for _, b in self.domains[e]}

    def side_vals(self, e: int, side: str) -> set[int]:
        return self.left_vals(e) if side == "L" else self.right_vals(e)


def _apply_creation(st: _State, step: dict[str, Any]) -> None:
    """Create the element(s) and facts a trace step describes."""
    ctx = st.ctx
    rule = step["rule"]
    if rule == "SEED":
        c = step["target"]
        if step["side"] == "L":
            dom = {(c, b) for b in range(ctx.nr)}
        else:
            dom = {(a, c) for a in range(ctx.nl)}
        step["element"] = st.new_element(dom)
    elif rule == "LE_BACK":
        c = step["target"]
        if step["side"] == "L":
            dom = {(c, b) for b in range(ctx.nr)}
        else:
            dom = {(a, c) for a in range(ctx.nl)}
        e = st.new_element(dom)
        step["element"] = e
        st.add_le(step["source"], e)
    elif rule == "WEAK_BACK":
        z = step["target"]
        if step["side"] == "L":
            dom = {(a, b) for a in bits(ctx.left.up[z]) for b in range(ctx.nr)}
        else:
            dom = {(a, b) for a in range(ctx.nl) for b in bits(ctx.right.up[z])}
        e = st.new_element(dom)
        step["element"] = e
        st.add_r(step["source"], e)
    elif rule == "R_BOUNDED_BACK":
        z = step["target"]
        if step["side"] == "L":
            dom = {(z, b) for b in range(ctx.nr)}
        else:
            dom = {(a, z) for a in range(ctx.nl)}
        e = st.new_element(dom)
        step["element"] = e
        st.add_r(step["source"], e)
    elif rule == "STRONG_BACK":
        z = step["target"]
        mid_elem = st.new_element(ctx.all_pairs)
        if step["side"] == "L":
            dom = {(a, b) for a in bits(ctx.left.down[z]) for b in range(ctx.nr)}
        else:
            dom = {(a, b) for a in range(ctx.nl) for b in bits(ctx.right.down[z])}
        end_elem = st.new_element(dom)
        step["element"] = mid_elem
        step["element2"] = end_elem
        st.add_le(step["source"], mid_elem)
        st.add_r(mid_elem, end_elem)
    elif rule == "F1":
        e = st.new_element(ctx.all_pairs)
        step["element"] = e
        st.add_r(step["upper"], e)
        st.add_le(step["rstep"], e)
    elif rule == "F2":
        e = st.new_element(ctx.all_pairs)
        step["element"] = e
        st.add_le(step["source"], e)
        st.add_r(e, step["upper"])
    else:
        raise AssertionError(f"unknown creation rule {rule}")
    st.steps.append(step)


def _filter_by_support(st: _State, u: int, v: int, relational: bool) -> bool:
    """Arc consistency along one fact; returns whether anything changed."""
    ctx = st.ctx
    if relational:
        lrel, rrel = ctx.left.rsucc, ctx.right.rsucc
        cause = "r_support"
    else:
        lrel, rrel = ctx.left.up, ctx.right.up
        cause = "le_support"
    du, dv = st.domains[u], st.domains[v]
    changed = False

    keep = {(a, b) for (a, b) in du
            if any(lrel[a] >> a2 & 1 and rrel[b] >> b2 & 1 for (a2, b2) in dv)}
    if keep != du:
        removed = sorted(du - keep)
        st.domains[u] = keep
        changed = True
        if not keep:
            raise _Contradiction(u, removed, cause)
        du = keep

    keep = {(a2, b2) for (a2, b2) in dv
            if any(lrel[a] >> a2 & 1 and rrel[b] >> b2 & 1 for (a, b) in du)}
    if keep != dv:
        removed = sorted(dv - keep)
        st.domains[v] = keep
        changed = True
        if not keep:
            raise _Contradiction(v, removed, cause)
    return changed


def _prune(st: _State) -> None:
    """Run all prune rules to fixpoint; raises _Contradiction on an empty
    domain.  Relational support runs before the commutation rule, so the
    final deletion on a doomed element names the commuting square."""
    ctx = st.ctx
    outer = True
    while outer:
        outer = False
        inner = True
        while inner:
            inner = False
            for u, v in st.le_facts:
                if _filter_by_support(st, u, v, relational=False):
                    inner = outer = True
            for u, v in st.r_facts:
                if _filter_by_support(st, u, v, relational=True):
                    inner = outer = True
        for e, dom in enumerate(st.domains):
            bad = sorted((a, b) for (a, b) in dom if ctx.f_img[a] != ctx.g_img[b])
            if bad:
                dom.difference_update(bad)
                outer = True
                if not dom:
                    raise _Contradiction(e, bad, "commutation")
        if ctx.mode == "IK":
            if _compat_fact_closure(st):
                outer = True


def _compat_fact_closure(st: _State) -> bool:
    """R = (<= ; R ; <=) holds in any iK co-amalgam, so close the fact set."""
    added = False
    le_pred: dict[int, set[int]] = {}
    le_succ: dict[int, set[int]] = {}
    for u, v in st.le_facts:
        le_pred.setdefault(v, set()).add(u)
        le_succ.setdefault(u, set()).add(v)
    for u, v in list(st.r_facts):
        for u2 in sorted(le_pred.get(u, set()) | {u}):
            for v2 in sorted(le_succ.get(v, set()) | {v}):
                if (u2, v2) not in st.r_set:
                    st.add_r(u2, v2)
                    added = True
    return added


def _common_mask(vals: Iterable[int], rows: Sequence[int], full: int) -> int:
    out = full
    for a in vals:
        out &= rows[a]
    return out


def _next_creation(st: _State) -> dict[str, Any] | None:
    """First unsatisfied create obligation in priority order, or None."""
    ctx = st.ctx
    mode = ctx.mode
    sides = (
        ("L", ctx.left, (1 << ctx.nl) - 1),
        ("R", ctx.right, (1 << ctx.nr) - 1),
    )

    if mode == "FS":
        # F1: facts u <= v and u R t need some s with v R s and t <= s.
        for u, v in st.le_facts:
            for u2, t in st.r_facts:
                if u2 != u:
                    continue
                key = ("F1", u, v, t)
                if key in st.fired:
                    continue
                if any((v, s) in st.r_set and (s == t or (t, s) in st.le_set)
                       for s in range(len(st.domains))):
                    st.fired.add(key)
                    continue
                st.fired.add(key)
                return {"rule": "F1", "source": u, "upper": v, "rstep": t}

        # F2: facts u R t and t <= t' need some s with u <= s and s R t'.
        for u, t in st.r_facts:
            for t2, tp in st.le_facts:
                if t2 != t:
                    continue
                key = ("F2", u, t, tp)
                if key in st.fired:
                    continue
                if any((s == u or (u, s) in st.le_set) and (s, tp) in st.r_set
                       for s in range(len(st.domains))):
                    st.fired.add(key)
                    continue
                st.fired.add(key)
                return {"rule": "F2", "source": u, "rstep": t, "upper": tp}

    for u in range(len(st.domains)):
        for side, frm, full in sides:
            vals = st.side_vals(u, side)
            common_up = _common_mask(vals, frm.up, full)
            for target in bits(common_up):
                if vals == {target}:
                    continue
                key = ("LE_BACK", side, u, target)
                if key in st.fired:
                    continue
                if any((u, v) in st.le_set and st.side_vals(v, side) == {target}
                       for v in range(len(st.domains))):
                    st.fired.add(key)
                    continue
                st.fired.add(key)
                return {"rule": "LE_BACK", "side": side, "source": u, "target": target}

    back_rule = "WEAK_BACK" if mode == "FS" else "R_BOUNDED_BACK"
    for u in range(len(st.domains)):
        for side, frm, full in sides:
            vals = st.side_vals(u, side)
            common_r = _common_mask(vals, frm.rsucc, full)
            for target in bits(common_r):
                key = (back_rule, side, u, target)
                if key in st.fired:
                    continue
                if mode == "FS":
                    cover = frm.up[target]
                    satisfied = any(
                        (u, v) in st.r_set
                        and all(cover >> a & 1 for a in st.side_vals(v, side))
                        for v in range(len(st.domains))
                    )
                else:
                    satisfied = any(
                        (u, v) in st.r_set and st.side_vals(v, side) == {target}
                        for v in range(len(st.domains))
                    )
                if satisfied:
                    st.fired.add(key)
                    continue
                st.fired.add(key)
                return {"rule": back_rule, "side": side, "source": u, "target": target}

    if mode == "FS":
        for u in range(len(st.domains)):
            for side, frm, full in sides:
                vals = st.side_vals(u, side)
                common_up = _common_mask(vals, frm.up, full)
                for mid in bits(common_up):
                    for target in bits(frm.rsucc[mid]):
                        key = ("STRONG_BACK", side, u, mid, target)
                        if key in st.fired:
                            continue
                        down = frm.down[target]
                        satisfied = False
                        for s in range(len(st.domains)):
                            if s != u and (u, s) not in st.le_set:
                                continue
                            for s2 in range(len(st.domains)):
                                if (s, s2) in st.r_set and all(
                                    down >> a & 1 for a in st.side_vals(s2, side)
                                ):
                                    satisfied = True
                                    break
                            if satisfied:
                                break
                        if satisfied:
                            st.fired.add(key)
                            continue
                        st.fired.add(key)
                        return {
                            "rule": "STRONG_BACK", "side": side,
                            "source": u, "mid": mid, "target": target,
                        }

    for side, frm, full in sides:
        for target in range(len(frm)):
            key = ("SEED", side, target)
            if key in st.fired:
                continue
            if any(st.side_vals(u, side) == {target} for u in range(len(st.domains))):
                st.fired.add(key)
                continue
            st.fired.add(key)
            return {"rule": "SEED", "side": side, "target": target}

    return None


def _node_name(ctx: _Ctx, side: str, idx: int) -> str:
    return (ctx.left if side == "L" else ctx.right).nodes[idx]


def _step_doc(ctx: _Ctx, step: dict[str, Any], rename: dict[int, str]) -> dict[str, Any]:
    rule = step["rule"]
    doc: dict[str, Any] = {"rule": rule, "condition": _CONDITION_LABELS[rule]}
    side = step.get("side")
    if side is not None:
        doc["side"] = "left" if side == "L" else "right"
    if rule == "SEED":
        doc["target"] = _node_name(ctx, side, step["target"])
        doc["element"] = rename[step["element"]]
    elif rule in ("LE_BACK", "WEAK_BACK", "R_BOUNDED_BACK"):
        doc["source"] = rename[step["source"]]
        doc["target"] = _node_name(ctx, side, step["target"])
        doc["element"] = rename[step["element"]]
        kind = "le" if rule == "LE_BACK" else "r"
        doc["fact"] = [kind, rename[step["source"]], rename[step["element"]]]
    elif rule == "STRONG_BACK":
        doc["source"] = rename[step["source"]]
        doc["mid"] = _node_name(ctx, side, step["mid"])
        doc["target"] = _node_name(ctx, side, step["target"])
        doc["element"] = rename[step["element"]]
        doc["element2"] = rename[step["element2"]]
        doc["facts"] = [
            ["le", rename[step["source"]], rename[step["element"]]],
            ["r", rename[step["element"]], rename[step["element2"]]],
        ]
    elif rule == "F1":
        doc["source"] = rename[step["source"]]
        doc["element"] = rename[step["element"]]
        doc["facts"] = [
            ["r", rename[step["upper"]], rename[step["element"]]],
            ["le", rename[step["rstep"]], rename[step["element"]]],
        ]
    elif rule == "F2":
        doc["source"] = rename[step["source"]]
        doc["element"] = rename[step["element"]]
        doc["facts"] = [
            ["le", rename[step["source"]], rename[step["element"]]],
            ["r", rename[step["element"]], rename[step["upper"]]],
        ]
    elif rule == "SPLIT":
        doc["element"] = rename.get(step["element"], f"e{step['element']}")
        if "pair" in step:
            a, b = step["pair"]
            doc["pair"] = [ctx.left.nodes[a], ctx.right.nodes[b]]
    return doc


def _contradiction_doc(ctx: _Ctx, contra: _Contradiction, rename: dict[int, str]) -> dict[str, Any]:
    a, b = contra.removed[0]
    return {
        "element": rename[contra.element],
        "cause": contra.cause,
        "left_image": ctx.left.nodes[a],
        "right_image": ctx.right.nodes[b],
        "left_base": ctx.c.base.nodes[ctx.f_img[a]],
        "right_base": ctx.c.base.nodes[ctx.g_img[b]],
        "removed": [[ctx.left.nodes[x], ctx.right.nodes[y]] for x, y in contra.removed],
    }


def _step_deps(step: dict[str, Any]) -> list[int]:
    rule = step["rule"]
    if rule == "SEED":
        return []
    if rule in ("LE_BACK", "WEAK_BACK", "R_BOUNDED_BACK", "STRONG_BACK", "SPLIT"):
        return [step["source"]] if rule != "SPLIT" else [step["element"]]
    if rule == "F1":
        return [step["source"], step["upper"], step["rstep"]]
    if rule == "F2":
        return [step["source"], step["rstep"], step["upper"]]
    raise AssertionError(rule)


def _created_ids(step: dict[str, Any]) -> list[int]:
    out = [step["element"]]
    if "element2" in step:
        out.append(step["element2"])
    return out


def _slice_steps(steps: list[dict[str, Any]], target: int) -> list[dict[str, Any]]:
    """Backward dependency slice of the creation steps reaching `target`."""
    needed = {target}
    kept: list[dict[str, Any]] = []
    for step in reversed(steps):
        if step["rule"] == "SPLIT":
            kept.append(step)
            needed.update(_step_deps(step))
            continue
        if any(e in needed for e in _created_ids(step)):
            kept.append(step)
            needed.update(_step_deps(step))
    return kept[::-1]


def _replay(ctx: _Ctx, steps: list[dict[str, Any]]) -> tuple[_State, _Contradiction | None]:
    """Re-run creation steps with a prune fixpoint after each one."""
    st = _State(ctx)
    remap: dict[int, int] = {}
    for orig in steps:
        step = dict(orig)
        if step["rule"] == "SPLIT":
            st.domains[remap[step["element"]]] = {tuple(step["pair"])}
        else:
            for key in ("source", "upper", "rstep"):
                if key in step:
                    step[key] = remap[step[key]]
            old_ids = _created_ids(orig)
            _apply_creation(st, step)
            new_ids = _created_ids(step)
            for old, new in zip(old_ids, new_ids):
                remap[old] = new
        try:
            _prune(st)
        except _Contradiction as contra:
            return st, contra
    return st, None


def _certificate(ctx: _Ctx, st: _State, contra: _Contradiction, splits: int) -> RefutationCertificate:
    steps = st.steps
    has_split = any(s["rule"] == "SPLIT" for s in steps)
    if not has_split:
        # shrink the trace to the dependency slice of the contradiction and
        # keep it only if its replay reproduces the same emptied element
        sliced = _slice_steps(steps, contra.element)
        _, replayed = _replay(ctx, sliced)
        if replayed is not None and _original_id(sliced, replayed.element) == contra.element:
            steps = sliced
            contra = _Contradiction(contra.element, replayed.removed, replayed.cause)
    rename: dict[int, str] = {}
    for step in steps:
        if step["rule"] == "SPLIT":
            continue
        for e in _created_ids(step):
            rename[e] = f"e{len(rename)}"
    step_docs = [_step_doc(ctx, s, rename) for s in steps]
    return RefutationCertificate(
        mode=ctx.mode,
        steps=tuple(step_docs),
        contradiction=_contradiction_doc(ctx, contra, rename),
        created_elements=len(rename),
        case_splits=splits,
    )


def _original_id(sliced: list[dict[str, Any]], replay_id: int) -> int:
    ids: list[int] = []
    for step in sliced:
        if step["rule"] != "SPLIT":
            ids.extend(_created_ids(step))
    return ids[replay_id]


def chase_refute(
    c: CoVFormation,
    max_elements: int = 32,
    max_splits: int = 64,
) -> RefutationCertificate | Inconclusive:
    """Refute the existence of any co-amalgam of the formation, or give up.

    A returned certificate is sound for co-amalgams of every size; an
    Inconclusive result carries the budget or fixpoint reason.
    """
    report = validate_formation(c)
    if not report.holds:
        raise FormationInvalid(f"formation fails {report.first_failure()}")
    ctx = _Ctx(c)
    splits_used = [0]
    outcome = _search(ctx, _State(ctx), max_elements, max_splits, splits_used)
    return outcome


def _search(
    ctx: _Ctx,
    st: _State,
    max_elements: int,
    max_splits: int,
    splits_used: list[int],
) -> RefutationCertificate | Inconclusive:
    while True:
        try:
            _prune(st)
        except _Contradiction as contra:
            return _certificate(ctx, st, contra, splits_used[0])

        creation = _next_creation(st)
        if creation is None:
            candidates = [e for e, d in enumerate(st.domains) if len(d) > 1]
            if not candidates:
                return Inconclusive("saturation reached a fixpoint without contradiction")
            if splits_used[0] >= max_splits:
                return Inconclusive(f"case split budget of {max_splits} exhausted")
            splits_used[0] += 1
            element = min(candidates, key=lambda e: (len(st.domains[e]), e))
            case_docs: list[dict[str, Any]] = []
            branch_certs: list[RefutationCertificate] = []
            for pair in sorted(st.domains[element]):
                branch = st.copy()
                branch.domains[element] = {pair}
                branch.steps.append({"rule": "SPLIT", "element": element, "pair": pair})
                result = _search(ctx, branch, max_elements, max_splits, splits_used)
                if isinstance(result, Inconclusive):
                    return result
                branch_certs.append(result)
                case_docs.append(
                    {
                        "pair": [ctx.left.nodes[pair[0]], ctx.right.nodes[pair[1]]],
                        "certificate": result.to_doc(),
                    }
                )
            first = branch_certs[0]
            split_step = {
                "rule": "SPLIT",
                "condition": _CONDITION_LABELS["SPLIT"],
                "element": f"e{element}",
                "cases": case_docs,
            }
            total = sum(cert.created_elements for cert in branch_certs)
            return RefutationCertificate(
                mode=ctx.mode,
                steps=(split_step,),
                contradiction=first.contradiction,
                created_elements=total,
                case_splits=splits_used[0],
            )

        needed = 2 if creation["rule"] == "STRONG_BACK" else 1
        if len(st.domains) + needed > max_elements:
            return Inconclusive(f"element budget of {max_elements} exhausted")
        _apply_creation(st, creation)


def replay_refutation(c: CoVFormation, cert: RefutationCertificate) -> dict[str, Any]:
    """Re-execute a certificate trace; returns the reproduced contradiction.

    Raises FormationInvalid when the trace does not reproduce an empty
    pair domain on the recorded element.
    """
    ctx = _Ctx(c)
    if any(step["rule"] == "SPLIT" for step in cert.steps):
        raise FormationInvalid("replay of split certificates is not supported; replay branches")
    steps = [_step_from_doc(ctx, doc) for doc in cert.steps]
    _, contra = _replay(ctx, steps)
    if contra is None:
        raise FormationInvalid("certificate trace did not reproduce an empty domain")
    rename = {i: f"e{i}" for i in range(cert.created_elements)}
    doc = _contradiction_doc(ctx, contra, rename)
    if doc["element"] != cert.contradiction["element"]:
        raise FormationInvalid("certificate trace emptied a different element on replay")
    return doc


def _step_from_doc(ctx: _Ctx, doc: dict[str, Any]) -> dict[str, Any]:
    rule = doc["rule"]
    step: dict[str, Any] = {"rule": rule}
    if "side" in doc:
        step["side"] = "L" if doc["side"] == "left" else "R"
        frm = ctx.left if step["side"] == "L" else ctx.right
    for key in ("source", "upper", "rstep", "element", "element2"):
        if key in doc and isinstance(doc[key], str) and doc[key].startswith("e"):
            step[key] = int(doc[key][1:])
    if rule == "F1":
        step["upper"] = int(doc["facts"][0][1][1:])
        step["rstep"] = int(doc["facts"][1][1][1:])
    elif rule == "F2":
        step["upper"] = int(doc["facts"][1][2][1:])
    if "target" in doc:
        step["target"] = frm.index(doc["target"])
    if "mid" in doc:
        step["mid"] = frm.index(doc["mid"])
    return step


# --- superamalgamation on finite algebra diagrams ---

class AlgebraHom:
    """Total map between finite algebras, given element-wise."""

    __slots__ = ("source", "target", "table")

    def __init__(self, source: FiniteAlgebra, target: FiniteAlgebra, table: Sequence[int]):
        if len(table) != source.size:
            raise PreconditionFailed("homomorphism table must cover the source")
        if any(not 0 <= v < target.size for v in table):
            raise PreconditionFailed("homomorphism table image out of range")
        self.source = source
        self.target = target
        self.table = tuple(table)

    def __call__(self, a: int) -> int:
        return self.table[a]

    def is_homomorphism(self) -> bool:
        s, t, h = self.source, self.target, self.table
        if h[s.bot] != t.bot or h[s.top] != t.top:
            return False
        for a in range(s.size):
            if t.box[h[a]] != h[s.box[a]] or t.dia[h[a]] != h[s.dia[a]]:
                return False
            for b in range(s.size):
                if (
                    t.meet[h[a]][h[b]] != h[s.meet[a][b]]
                    or t.join[h[a]][h[b]] != h[s.join[a][b]]
                    or t.himp[h[a]][h[b]] != h[s.himp[a][b]]
                ):
                    return False
        return True

    def is_injective(self) -> bool:
        return len(set(self.table)) == len(self.table)


def check_superamalgam(
    h1: AlgebraHom, h2: AlgebraHom, p1: AlgebraHom, p2: AlgebraHom
) -> AggregateReport:
    """Order interpolation across the two legs of an amalgam square.

    h1: A -> B1 and h2: A -> B2 embed the common subalgebra; p1: B1 -> C
    and p2: B2 -> C complete the amalgam.
    """
    if h1.source is not h2.source and h1.source.to_doc() != h2.source.to_doc():
        raise PreconditionFailed("h1 and h2 must share their source algebra")
    if p1.source is not h1.target and p1.source.to_doc() != h1.target.to_doc():
        raise PreconditionFailed("p1 must be defined on the target of h1")
    if p2.source is not h2.target and p2.source.to_doc() != h2.target.to_doc():
        raise PreconditionFailed("p2 must be defined on the target of h2")
    if p1.target is not p2.target and p1.target.to_doc() != p2.target.to_doc():
        raise PreconditionFailed("p1 and p2 must share their target algebra")
    for name, hom in (("h1", h1), ("h2", h2), ("p1", p1), ("p2", p2)):
        if not hom.is_homomorphism():
            raise PreconditionFailed(f"{name} is not a homomorphism")
        if not hom.is_injective():
            raise PreconditionFailed(f"{name} is not injective")
    for a in range(h1.source.size):
        if p1(h1(a)) != p2(h2(a)):
            raise PreconditionFailed(f"square does not commute at element {a}")

    a_rng = range(h1.source.size)
    b1_alg, b2_alg, c_alg = h1.target, h2.target, p1.target

    def clause(first: AlgebraHom, second: AlgebraHom, hf: AlgebraHom, hs: AlgebraHom,
               nf: FiniteAlgebra, ns: FiniteAlgebra) -> tuple[bool, Any]:
        for b1 in range(nf.size):
            for b2 in range(ns.size):
                if not c_alg.le(first(b1), second(b2)):
                    continue
                if not any(nf.le(b1, hf(a)) and ns.le(hs(a), b2) for a in a_rng):
                    return False, {"witness": [b1, b2]}
        return True, {}

    ok1, d1 = clause(p1, p2, h1, h2, b1_alg, b2_alg)
    ok2, d2 = clause(p2, p1, h2, h1, b2_alg, b1_alg)
    return AggregateReport(
        "superamalgam",
        (("interpolation:left_to_right", ok1, d1), ("interpolation:right_to_left", ok2, d2)),
    )


# --- JSON ---

def formation_to_doc(c: CoVFormation) -> dict[str, Any]:
    return {
        "base": fr.to_doc(c.base),
        "left": fr.to_doc(c.left),
        "right": fr.to_doc(c.right),
        "f": c.fmap.table(),
        "g": c.gmap.table(),
        "mode": c.mode,
    }


def formation_from_doc(doc: dict[str, Any], base_dir: str | Path = ".") -> CoVFormation:
    def frame_of(spec) -> Frame:
        if isinstance(spec, str):
            return fr.load(Path(base_dir) / spec)
        return fr.from_doc(spec)

    base = frame_of(doc["base"])
    left = frame_of(doc["left"])
    right = frame_of(doc["right"])
    f_spec = doc["f"]
    g_spec = doc["g"]
    fmap = FrameMap(left, base, f_spec.get("map", f_spec) if isinstance(f_spec, dict) else f_spec)
    gmap = FrameMap(right, base, g_spec.get("map", g_spec) if isinstance(g_spec, dict) else g_spec)
    return CoVFormation(base, left, right, fmap, gmap, doc.get("mode", "FS"))


def load_formation(path: str | Path) -> CoVFormation:
    path = Path(path)
    with open(path) as handle:
        return formation_from_doc(json.load(handle), base_dir=path.parent)


def save_formation(c: CoVFormation, path: str | Path) -> None:
    with open(path, "w") as handle:
        json.dump(formation_to_doc(c), handle, indent=2)
        handle.write("\n")
