"""Finite modal Heyting algebras.

Two representations: `UpsetAlgebra`, the dual algebra of a frame whose
elements are the upsets, and `FiniteAlgebra`, explicit operation tables.
The box of a dual algebra is taken along the composite (<= ; R), which
keeps its outputs upward closed on every frame; the diamond goes along R
itself and needs condition F1 for closure.  On frames where R equals
(<= ; R ; <=) the two box choices agree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import FskitError
from .frame import ConditionReport, Frame, bits, is_fs_frame, popcount


class NotAnFsFrame(FskitError):
    def __init__(self, reports):
        self.reports = reports
        failed = ", ".join(r.name for r in reports if not r.holds)
        super().__init__(f"frame fails {failed}")


class ClosureViolation(FskitError):
    def __init__(self, op: str, upset: tuple[str, ...]):
        self.op = op
        self.upset = upset
        super().__init__(f"{op} output is not an upset for input {set(upset) or '{}'}")


class NotAModalFilter(FskitError):
    pass


class SizeBoundExceeded(FskitError):
    pass


class FiniteAlgebra:
    """Explicit operation tables, indexed by element position."""

    __slots__ = ("size", "meet", "join", "himp", "bot", "top", "box", "dia")

    def __init__(self, size, meet, join, himp, bot, top, box, dia):
        self.size = size
        self.meet = [list(row) for row in meet]
        self.join = [list(row) for row in join]
        self.himp = [list(row) for row in himp]
        self.bot = bot
        self.top = top
        self.box = list(box)
        self.dia = list(dia)
        for name, table in (("meet", self.meet), ("join", self.join), ("himp", self.himp)):
            if len(table) != size or any(len(row) != size for row in table):
                raise ValueError(f"{name} table must be {size}x{size}")
            if any(not 0 <= v < size for row in table for v in row):
                raise ValueError(f"{name} table entry out of range")
        for name, arr in (("box", self.box), ("dia", self.dia)):
            if len(arr) != size or any(not 0 <= v < size for v in arr):
                raise ValueError(f"{name} table must list {size} elements")
        if not (0 <= bot < size and 0 <= top < size):
            raise ValueError("bot/top out of range")

    def le(self, a: int, b: int) -> bool:
        return self.meet[a][b] == a

    def to_doc(self) -> dict[str, Any]:
        return {
            "size": self.size,
            "meet": self.meet,
            "join": self.join,
            "himp": self.himp,
            "bot": self.bot,
            "top": self.top,
            "box": self.box,
            "dia": self.dia,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "FiniteAlgebra":
        return cls(
            doc["size"], doc["meet"], doc["join"], doc["himp"],
            doc["bot"], doc["top"], doc["box"], doc["dia"],
        )

    def __repr__(self) -> str:
        return f"FiniteAlgebra(size={self.size})"


def load(path: str | Path) -> FiniteAlgebra:
    with open(path) as handle:
        return FiniteAlgebra.from_doc(json.load(handle))


def save(alg: FiniteAlgebra, path: str | Path) -> None:
    with open(path, "w") as handle:
        json.dump(alg.to_doc(), handle, indent=2)
        handle.write("\n")


class UpsetAlgebra:
    """Dual algebra of a frame: all upsets with set, Heyting and modal ops.

    Elements are ordered by cardinality, then lexicographically by node
    membership in the frame's node order.
    """

    __slots__ = ("base", "elements", "_index", "ops")

    def __init__(self, base: Frame, elements: Sequence[int], ops: FiniteAlgebra):
        self.base = base
        self.elements = tuple(elements)
        self._index = {mask: i for i, mask in enumerate(self.elements)}
        self.ops = ops

    def __len__(self) -> int:
        return len(self.elements)

    def element_index(self, mask: int) -> int:
        return self._index[mask]

    def element_nodes(self, i: int) -> tuple[str, ...]:
        return self.base.names(self.elements[i])

    def __repr__(self) -> str:
        return f"UpsetAlgebra({len(self.elements)} upsets over {len(self.base)} nodes)"


def upset_masks(f: Frame) -> list[int]:
    """All upset bit masks, in canonical element order."""
    n = len(f)
    found = [m for m in range(1 << n) if f.is_upset(m)]
    found.sort(key=lambda m: (popcount(m), tuple(bits(m))))
    return found


def dual_algebra(f: Frame) -> UpsetAlgebra:
    """The dual finite FS-algebra of an FS-frame."""
    check = is_fs_frame(f)
    if not check.holds:
        raise NotAnFsFrame(check.reports)

    elements = upset_masks(f)
    index = {mask: i for i, mask in enumerate(elements)}
    n = len(elements)
    full = f.full_mask()
    lr = [f.le_then_r(i) for i in range(len(f))]

    def himp_mask(u: int, v: int) -> int:
        out = 0
        for x in range(len(f)):
            if not f.up[x] & u & ~v:
                out |= 1 << x
        return out

    def dia_mask(u: int) -> int:
        out = 0
        for x in range(len(f)):
            if f.rsucc[x] & u:
                out |= 1 << x
        return out

    def box_mask(u: int) -> int:
        out = 0
        for x in range(len(f)):
            if not lr[x] & ~u:
                out |= 1 << x
        return out

    def lookup(op: str, mask: int, source: int) -> int:
        got = index.get(mask)
        if got is None:
            raise ClosureViolation(op, f.names(source))
        return got

    meet = [[index[u & v] for v in elements] for u in elements]
    join = [[index[u | v] for v in elements] for u in elements]
    himp = [[lookup("himp", himp_mask(u, v), u) for v in elements] for u in elements]
    box = [lookup("box", box_mask(u), u) for u in elements]
    dia = [lookup("dia", dia_mask(u), u) for u in elements]

    ops = FiniteAlgebra(n, meet, join, himp, index[0], index[full], box, dia)
    return UpsetAlgebra(f, elements, ops)


# --- axiom checks ---

@dataclass(frozen=True, slots=True)
class AlgebraReport:
    conditions: tuple[ConditionReport, ...]

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.conditions)

    def __getitem__(self, name: str) -> ConditionReport:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_doc(self) -> dict[str, Any]:
        return {"holds": self.holds, "conditions": [c.to_doc() for c in self.conditions]}


def check_fs_algebra(alg: FiniteAlgebra) -> AlgebraReport:
    """Bounded-lattice laws, Heyting residuation, and the four modal axioms.

    Residuation (c & a <= b iff c <= a -> b) pins the Heyting implication
    completely on a finite lattice, so no separate equational basis is run.
    """
    rng = range(alg.size)
    meet, join, himp = alg.meet, alg.join, alg.himp
    out: list[ConditionReport] = []

    def report(name: str, witness=None):
        out.append(ConditionReport(name, witness is None, witness))

    def first(name: str, pred, arity: int):
        if arity == 1:
            gen = ((a,) for a in rng)
        elif arity == 2:
            gen = ((a, b) for a in rng for b in rng)
        else:
            gen = ((a, b, c) for a in rng for b in rng for c in rng)
        for args in gen:
            if not pred(*args):
                report(name, tuple(str(v) for v in args))
                return
        report(name)

    first("meet_commutative", lambda a, b: meet[a][b] == meet[b][a], 2)
    first("join_commutative", lambda a, b: join[a][b] == join[b][a], 2)
    first("meet_associative", lambda a, b, c: meet[meet[a][b]][c] == meet[a][meet[b][c]], 3)
    first("join_associative", lambda a, b, c: join[join[a][b]][c] == join[a][join[b][c]], 3)
    first("meet_idempotent", lambda a: meet[a][a] == a, 1)
    first("join_idempotent", lambda a: join[a][a] == a, 1)
    first("absorption", lambda a, b: meet[a][join[a][b]] == a and join[a][meet[a][b]] == a, 2)
    first("bounds", lambda a: meet[a][alg.top] == a and join[a][alg.bot] == a, 1)
    first(
        "residuation",
        lambda a, b, c: (meet[c][a] == meet[meet[c][a]][b]) == (meet[c][himp[a][b]] == c),
        3,
    )

    box, dia = alg.box, alg.dia
    report("box_top", None if box[alg.top] == alg.top else ())
    report("dia_bot", None if dia[alg.bot] == alg.bot else ())
    first("box_meet", lambda a, b: box[meet[a][b]] == meet[box[a]][box[b]], 2)
    first("dia_join", lambda a, b: dia[join[a][b]] == join[dia[a]][dia[b]], 2)
    first("connection_dia_imp", lambda a, b: alg.le(dia[himp[a][b]], himp[box[a]][dia[b]]), 2)
    first("connection_imp_box", lambda a, b: alg.le(himp[dia[a]][box[b]], box[himp[a][b]]), 2)

    return AlgebraReport(tuple(out))


# --- modal filters ---

@dataclass(frozen=True, slots=True)
class ModalFilter:
    algebra: FiniteAlgebra
    members: frozenset[int]

    def to_doc(self) -> dict[str, Any]:
        return {"members": sorted(self.members)}


def is_modal_filter(alg: FiniteAlgebra, members: Iterable[int]) -> tuple[bool, str]:
    s = set(members)
    if alg.top not in s:
        return False, "missing top"
    for a in s:
        if alg.box[a] not in s:
            return False, f"not box-closed at {a}"
        for b in s:
            if alg.meet[a][b] not in s:
                return False, f"not meet-closed at ({a}, {b})"
        for b in range(alg.size):
            if alg.le(a, b) and b not in s:
                return False, f"not upward closed at ({a}, {b})"
    return True, ""


def modal_filter_generated(alg: FiniteAlgebra, seed: Iterable[int]) -> ModalFilter:
    """Least fixpoint of closure under meet, upward closure and box."""
    members = set(seed)
    members.add(alg.top)
    changed = True
    while changed:
        changed = False
        for a in list(members):
            b = alg.box[a]
            if b not in members:
                members.add(b)
                changed = True
        for a in list(members):
            for b in list(members):
                m = alg.meet[a][b]
                if m not in members:
                    members.add(m)
                    changed = True
        for a in list(members):
            for b in range(alg.size):
                if b not in members and alg.le(a, b):
                    members.add(b)
                    changed = True
    return ModalFilter(alg, frozenset(members))


def enumerate_modal_filters(alg: FiniteAlgebra, bound: int = 14) -> list[frozenset[int]]:
    """All modal filters, by exhaustive subset search (exponential)."""
    if alg.size > bound:
        raise SizeBoundExceeded(f"algebra size {alg.size} exceeds enumeration bound {bound}")
    up_of = [frozenset(b for b in range(alg.size) if alg.le(a, b)) for a in range(alg.size)]
    out = []
    for code in range(1 << alg.size):
        s = frozenset(i for i in range(alg.size) if code >> i & 1)
        if alg.top not in s:
            continue
        ok = all(alg.box[a] in s and up_of[a] <= s for a in s)
        if ok:
            ok = all(alg.meet[a][b] in s for a in s for b in s)
        if ok:
            out.append(s)
    out.sort(key=lambda s: (len(s), sorted(s)))
    return out


# --- congruences and quotients ---

def theta_classes(alg: FiniteAlgebra, members: frozenset[int]) -> list[list[int]]:
    """Equivalence classes of the congruence induced by a modal filter:
    a ~ b iff both a -> b and b -> a lie in the filter.
    """
    def related(a: int, b: int) -> bool:
        return alg.himp[a][b] in members and alg.himp[b][a] in members

    classes: list[list[int]] = []
    for a in range(alg.size):
        for cls in classes:
            if related(a, cls[0]):
                cls.append(a)
                break
        else:
            classes.append([a])
    return classes


def _class_ids(classes: list[list[int]], size: int) -> list[int]:
    cid = [0] * size
    for k, cls in enumerate(classes):
        for a in cls:
            cid[a] = k
    return cid


def partition_key(cid: Sequence[int]) -> tuple[int, ...]:
    """Canonical form of a partition: classes numbered by first occurrence."""
    remap: dict[int, int] = {}
    out = []
    for c in cid:
        if c not in remap:
            remap[c] = len(remap)
        out.append(remap[c])
    return tuple(out)


def is_fs_congruence(alg: FiniteAlgebra, cid: Sequence[int]) -> bool:
    """Compatibility of an equivalence relation with all operations."""
    rng = range(alg.size)
    for a in rng:
        for b in rng:
            if cid[a] != cid[b]:
                continue
            if cid[alg.box[a]] != cid[alg.box[b]] or cid[alg.dia[a]] != cid[alg.dia[b]]:
                return False
            for c in rng:
                if (
                    cid[alg.meet[a][c]] != cid[alg.meet[b][c]]
                    or cid[alg.join[a][c]] != cid[alg.join[b][c]]
                    or cid[alg.himp[a][c]] != cid[alg.himp[b][c]]
                    or cid[alg.himp[c][a]] != cid[alg.himp[c][b]]
                ):
                    return False
    return True


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def congruence_closure(alg: FiniteAlgebra, pairs: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    """Smallest congruence identifying the given pairs, as a partition key."""
    uf = _UnionFind(alg.size)
    for a, b in pairs:
        uf.union(a, b)
    rng = range(alg.size)
    changed = True
    while changed:
        changed = False
        for a in rng:
            for b in rng:
                if a < b and uf.find(a) == uf.find(b):
                    if uf.union(alg.box[a], alg.box[b]):
                        changed = True
                    if uf.union(alg.dia[a], alg.dia[b]):
                        changed = True
                    for c in rng:
                        for x, y in (
                            (alg.meet[a][c], alg.meet[b][c]),
                            (alg.join[a][c], alg.join[b][c]),
                            (alg.himp[a][c], alg.himp[b][c]),
                            (alg.himp[c][a], alg.himp[c][b]),
                        ):
                            if uf.union(x, y):
                                changed = True
    return partition_key([uf.find(a) for a in rng])


def _equiv_join(key1: Sequence[int], key2: Sequence[int]) -> tuple[int, ...]:
    """Transitive closure of the union of two equivalence relations."""
    n = len(key1)
    uf = _UnionFind(n)
    for key in (key1, key2):
        first: dict[int, int] = {}
        for i, c in enumerate(key):
            if c in first:
                uf.union(first[c], i)
            else:
                first[c] = i
    return partition_key([uf.find(i) for i in range(n)])


def enumerate_fs_congruences(alg: FiniteAlgebra, bound: int = 14) -> list[tuple[int, ...]]:
    """All congruences, generated as joins of principal congruences.

    Heyting-algebra congruences permute, so the lattice join of two
    congruences is the transitive closure of their union; the operation
    closure below is a safety net only.
    """
    if alg.size > bound:
        raise SizeBoundExceeded(f"algebra size {alg.size} exceeds enumeration bound {bound}")
    identity = partition_key(range(alg.size))
    principals = set()
    for a in range(alg.size):
        for b in range(a + 1, alg.size):
            principals.add(congruence_closure(alg, [(a, b)]))
    found = {identity}
    queue = [identity]
    while queue:
        cur = queue.pop()
        for p in principals:
            merged = _equiv_join(cur, p)
            if merged not in found:
                if not is_fs_congruence(alg, merged):
                    merged = congruence_closure(
                        alg,
                        [(i, j) for i in range(alg.size) for j in range(i + 1, alg.size)
                         if merged[i] == merged[j]],
                    )
                    if merged in found:
                        continue
                found.add(merged)
                queue.append(merged)
    return sorted(found)


def filter_of_congruence(alg: FiniteAlgebra, cid: Sequence[int]) -> frozenset[int]:
    """F(theta) = elements congruent to top."""
    return frozenset(a for a in range(alg.size) if cid[a] == cid[alg.top])


def quotient_by_modal_filter(alg: FiniteAlgebra, flt: ModalFilter) -> tuple[FiniteAlgebra, tuple[int, ...]]:
    """Quotient algebra and the projection element -> class index."""
    ok, why = is_modal_filter(alg, flt.members)
    if not ok:
        raise NotAModalFilter(why)
    classes = theta_classes(alg, flt.members)
    cid = _class_ids(classes, alg.size)
    reps = [cls[0] for cls in classes]

    if not is_fs_congruence(alg, cid):
        raise NotAModalFilter("induced relation is not a congruence")

    k = len(classes)
    meet = [[cid[alg.meet[a][b]] for b in reps] for a in reps]
    join = [[cid[alg.join[a][b]] for b in reps] for a in reps]
    himp = [[cid[alg.himp[a][b]] for b in reps] for a in reps]
    box = [cid[alg.box[a]] for a in reps]
    dia = [cid[alg.dia[a]] for a in reps]
    quotient = FiniteAlgebra(k, meet, join, himp, cid[alg.bot], cid[alg.top], box, dia)
    return quotient, tuple(cid)


@dataclass(frozen=True, slots=True)
class BijectionReport:
    filter_count: int
    congruence_count: int
    holds: bool
    detail: str

    def to_doc(self) -> dict[str, Any]:
        return {
            "filter_count": self.filter_count,
            "congruence_count": self.congruence_count,
            "holds": self.holds,
            "detail": self.detail,
        }


def congruence_filter_bijection_check(alg: FiniteAlgebra, bound: int = 10) -> BijectionReport:
    """Verify the filter/congruence correspondence by full enumeration."""
    if alg.size > bound:
        raise SizeBoundExceeded(f"algebra size {alg.size} exceeds bound {bound}")
    filters = enumerate_modal_filters(alg, bound=bound)
    congruences = enumerate_fs_congruences(alg, bound=bound)
    cong_set = set(congruences)

    for flt in filters:
        theta = partition_key(_class_ids(theta_classes(alg, flt), alg.size))
        if theta not in cong_set:
            return BijectionReport(len(filters), len(congruences), False,
                                   f"theta of filter {sorted(flt)} is not a congruence")
        if filter_of_congruence(alg, theta) != flt:
            return BijectionReport(len(filters), len(congruences), False,
                                   f"round trip lost filter {sorted(flt)}")

    filter_set = set(filters)
    for theta in congruences:
        flt = filter_of_congruence(alg, theta)
        if flt not in filter_set:
            return BijectionReport(len(filters), len(congruences), False,
                                   "congruence maps outside the filter set")
        back = partition_key(_class_ids(theta_classes(alg, flt), alg.size))
        if back != theta:
            return BijectionReport(len(filters), len(congruences), False,
                                   "round trip lost a congruence")

    holds = len(filters) == len(congruences)
    detail = "" if holds else "counts differ"
    return BijectionReport(len(filters), len(congruences), holds, detail)
