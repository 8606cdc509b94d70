"""Finite frames (X, <=, R) and the frame-level condition checks.

A frame stores a partial order `le` (always reflexive-transitively closed)
and a raw binary relation `r` (kept exactly as given).  Node sets are
represented as bit masks over the node list order; that order also breaks
all ties when reporting witnesses, so results are stable across runs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

from .errors import FskitError


class DuplicateNode(FskitError):
    pass


class UnknownEndpoint(FskitError):
    pass


class OrderCycle(FskitError):
    """The order generators admit a cycle; `cycle` lists the offending nodes."""

    def __init__(self, cycle: tuple[str, ...]):
        self.cycle = cycle
        super().__init__("order generators form a cycle: " + " <= ".join(cycle))


def bits(mask: int) -> Iterator[int]:
    """Indices of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True, slots=True)
class ConditionReport:
    """Outcome of one universally quantified condition check.

    When `holds` is false, `witness` instantiates the violated quantifiers
    (node names, in the order the condition states them).
    """

    name: str
    holds: bool
    witness: tuple[str, ...] | None = None

    def to_doc(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "holds": self.holds,
            "witness": list(self.witness) if self.witness is not None else None,
        }


class Frame:
    """Immutable finite frame; build with `from_edges` or `from_doc`."""

    __slots__ = ("nodes", "_index", "up", "rsucc", "down", "rpred", "_hash")

    def __init__(self, nodes: Sequence[str], up: Sequence[int], rsucc: Sequence[int]):
        self.nodes = tuple(nodes)
        self._index = {name: i for i, name in enumerate(self.nodes)}
        self.up = tuple(up)
        self.rsucc = tuple(rsucc)
        n = len(self.nodes)
        down = [0] * n
        rpred = [0] * n
        for i in range(n):
            for j in bits(self.up[i]):
                down[j] |= 1 << i
            for j in bits(self.rsucc[i]):
                rpred[j] |= 1 << i
        self.down = tuple(down)
        self.rpred = tuple(rpred)
        self._hash = hash((self.nodes, self.up, self.rsucc))

    # --- basic accessors ---

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Frame)
            and self.nodes == other.nodes
            and self.up == other.up
            and self.rsucc == other.rsucc
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Frame({len(self.nodes)} nodes, {sum(map(popcount, self.rsucc))} r-edges)"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownEndpoint(f"unknown node {name!r}") from None

    def le(self, a: str, b: str) -> bool:
        return bool(self.up[self.index(a)] >> self.index(b) & 1)

    def r(self, a: str, b: str) -> bool:
        return bool(self.rsucc[self.index(a)] >> self.index(b) & 1)

    def names(self, mask: int) -> tuple[str, ...]:
        return tuple(self.nodes[i] for i in bits(mask))

    def full_mask(self) -> int:
        return (1 << len(self.nodes)) - 1

    def le_pairs(self) -> list[tuple[str, str]]:
        """All (a, b) with a <= b, including reflexive pairs."""
        return [(self.nodes[i], self.nodes[j]) for i in range(len(self.nodes)) for j in bits(self.up[i])]

    def r_pairs(self) -> list[tuple[str, str]]:
        return [(self.nodes[i], self.nodes[j]) for i in range(len(self.nodes)) for j in bits(self.rsucc[i])]

    # --- composite relations ---

    def le_then_r(self, i: int) -> int:
        """(<= ; R)[i]: first go up, then take an R-step."""
        out = 0
        for j in bits(self.up[i]):
            out |= self.rsucc[j]
        return out

    def le_r_le(self, i: int) -> int:
        """(<= ; R ; <=)[i]."""
        out = 0
        for j in bits(self.le_then_r(i)):
            out |= self.up[j]
        return out

    def is_upset(self, mask: int) -> bool:
        for i in bits(mask):
            if self.up[i] & ~mask:
                return False
        return True

    def upclose(self, mask: int) -> int:
        out = 0
        for i in bits(mask):
            out |= self.up[i]
        return out

    def downclose(self, mask: int) -> int:
        out = 0
        for i in bits(mask):
            out |= self.down[i]
        return out


def popcount(mask: int) -> int:
    return mask.bit_count()


def from_edges(
    nodes: Sequence[str],
    le_gen: Iterable[tuple[str, str]],
    r_edges: Iterable[tuple[str, str]],
) -> Frame:
    """Build a frame: `le` is the reflexive-transitive closure of `le_gen`,
    `r` is exactly `r_edges`.
    """
    node_list = list(nodes)
    index: dict[str, int] = {}
    for i, name in enumerate(node_list):
        if name in index:
            raise DuplicateNode(f"duplicate node {name!r}")
        index[name] = i
    n = len(node_list)

    def resolve(a: str) -> int:
        if a not in index:
            raise UnknownEndpoint(f"unknown node {a!r}")
        return index[a]

    gen = [0] * n
    gen_pairs: list[tuple[int, int]] = []
    for a, b in le_gen:
        ia, ib = resolve(a), resolve(b)
        gen[ia] |= 1 << ib
        gen_pairs.append((ia, ib))

    up = [gen[i] | (1 << i) for i in range(n)]
    for j in range(n):
        jb = 1 << j
        for i in range(n):
            if up[i] & jb:
                up[i] |= up[j]

    for i in range(n):
        for j in bits(up[i]):
            if j != i and up[j] >> i & 1:
                raise OrderCycle(_find_cycle(node_list, gen_pairs, i, j))

    rsucc = [0] * n
    for a, b in r_edges:
        rsucc[resolve(a)] |= 1 << resolve(b)

    return Frame(node_list, up, rsucc)


def _find_cycle(nodes: Sequence[str], gen_pairs: list[tuple[int, int]], i: int, j: int) -> tuple[str, ...]:
    """A generator-edge cycle through i and j (both reachable from each other)."""
    succ: dict[int, list[int]] = {}
    for a, b in gen_pairs:
        succ.setdefault(a, []).append(b)

    def path(src: int, dst: int) -> list[int]:
        prev = {src: src}
        queue = [src]
        while queue:
            cur = queue.pop(0)
            if cur == dst:
                out = [dst]
                while out[-1] != src:
                    out.append(prev[out[-1]])
                return out[::-1]
            for nxt in succ.get(cur, []):
                if nxt not in prev:
                    prev[nxt] = cur
                    queue.append(nxt)
        raise AssertionError("cycle endpoints not connected")

    there = path(i, j)
    back = path(j, i)
    cycle = there + back[1:]
    return tuple(nodes[k] for k in cycle)


# --- condition checks ---

def check_f1(f: Frame) -> ConditionReport:
    """F1: x <= x' and x R y imply some y' with x' R y' and y <= y'."""
    for x in range(len(f)):
        for xp in bits(f.up[x]):
            for y in bits(f.rsucc[x]):
                if not f.rsucc[xp] & f.up[y]:
                    return ConditionReport("F1", False, (f.nodes[x], f.nodes[xp], f.nodes[y]))
    return ConditionReport("F1", True)


def check_f2(f: Frame) -> ConditionReport:
    """F2: x R y and y <= y' imply some x' with x <= x' and x' R y'."""
    for x in range(len(f)):
        for y in bits(f.rsucc[x]):
            for yp in bits(f.up[y]):
                if not any(f.rsucc[xp] >> yp & 1 for xp in bits(f.up[x])):
                    return ConditionReport("F2", False, (f.nodes[x], f.nodes[y], f.nodes[yp]))
    return ConditionReport("F2", True)


def check_mixed(f: Frame) -> ConditionReport:
    """MIXED: R[x] equals R[up(x)] intersected with down(R[x])."""
    for x in range(len(f)):
        r_up = 0
        for j in bits(f.up[x]):
            r_up |= f.rsucc[j]
        candidate = r_up & f.downclose(f.rsucc[x])
        stray = candidate & ~f.rsucc[x]
        if stray:
            z = next(bits(stray))
            return ConditionReport("MIXED", False, (f.nodes[x], f.nodes[z]))
    return ConditionReport("MIXED", True)


def check_fs_conditions(f: Frame) -> list[ConditionReport]:
    return [check_f1(f), check_f2(f), check_mixed(f)]


@dataclass(frozen=True, slots=True)
class FrameCheck:
    holds: bool
    reports: tuple[ConditionReport, ...]

    def to_doc(self) -> dict[str, Any]:
        return {"holds": self.holds, "reports": [r.to_doc() for r in self.reports]}


def is_fs_frame(f: Frame) -> FrameCheck:
    """F1 and F2 (the Fischer-Servi confluence conditions)."""
    reports = (check_f1(f), check_f2(f))
    return FrameCheck(all(r.holds for r in reports), reports)


def is_fs_space_finite(f: Frame) -> FrameCheck:
    """F1, F2 and MIXED; for finite frames this characterizes FS-spaces."""
    reports = (check_f1(f), check_f2(f), check_mixed(f))
    return FrameCheck(all(r.holds for r in reports), reports)


def check_ik_compatibility(f: Frame) -> ConditionReport:
    """IK_COMPAT: R equals (<= ; R ; <=) as sets of pairs."""
    for x in range(len(f)):
        composite = f.le_r_le(x)
        diff = composite ^ f.rsucc[x]
        if diff:
            y = next(bits(diff))
            return ConditionReport("IK_COMPAT", False, (f.nodes[x], f.nodes[y]))
    return ConditionReport("IK_COMPAT", True)


def classify(f: Frame) -> dict[str, ConditionReport]:
    """REFLEXIVE / TRANSITIVE / PREORDER for R, and IGL_WF for (<= ; R)."""
    reflexive = ConditionReport("REFLEXIVE", True)
    for x in range(len(f)):
        if not f.rsucc[x] >> x & 1:
            reflexive = ConditionReport("REFLEXIVE", False, (f.nodes[x],))
            break

    transitive = ConditionReport("TRANSITIVE", True)
    for x in range(len(f)):
        if not transitive.holds:
            break
        for y in bits(f.rsucc[x]):
            stray = f.rsucc[y] & ~f.rsucc[x]
            if stray:
                z = next(bits(stray))
                transitive = ConditionReport("TRANSITIVE", False, (f.nodes[x], f.nodes[y], f.nodes[z]))
                break

    if reflexive.holds and transitive.holds:
        preorder = ConditionReport("PREORDER", True)
    else:
        bad = reflexive if not reflexive.holds else transitive
        preorder = ConditionReport("PREORDER", False, bad.witness)

    cycle = _composite_cycle(f)
    igl = ConditionReport("IGL_WF", cycle is None, cycle)

    return {"REFLEXIVE": reflexive, "TRANSITIVE": transitive, "PREORDER": preorder, "IGL_WF": igl}


def _composite_cycle(f: Frame) -> tuple[str, ...] | None:
    """A cycle of the composite (<= ; R), as node names, or None."""
    n = len(f)
    comp = [f.le_then_r(i) for i in range(n)]
    color = [0] * n  # 0 unseen, 1 on stack, 2 done
    for start in range(n):
        if color[start]:
            continue
        stack: list[tuple[int, Iterator[int]]] = [(start, bits(comp[start]))]
        color[start] = 1
        path = [start]
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == 1:
                    k = path.index(nxt)
                    cyc = path[k:] + [nxt]
                    return tuple(f.nodes[i] for i in cyc)
                if color[nxt] == 0:
                    color[nxt] = 1
                    path.append(nxt)
                    stack.append((nxt, bits(comp[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                path.pop()
                stack.pop()
    return None


def reflexive_closure(f: Frame) -> Frame:
    """Same frame with R made reflexive."""
    rsucc = [f.rsucc[i] | (1 << i) for i in range(len(f))]
    return Frame(f.nodes, f.up, rsucc)


# --- JSON and DOT ---

def cover_pairs(f: Frame) -> list[tuple[str, str]]:
    """Transitive reduction of <= minus reflexive pairs (the generator set)."""
    out = []
    for i in range(len(f)):
        strict = f.up[i] & ~(1 << i)
        for j in bits(strict):
            between = strict & f.down[j] & ~(1 << j)
            if not between:
                out.append((f.nodes[i], f.nodes[j]))
    return out


def to_doc(f: Frame) -> dict[str, Any]:
    return {
        "nodes": list(f.nodes),
        "le": [list(p) for p in cover_pairs(f)],
        "r": [list(p) for p in f.r_pairs()],
    }


def from_doc(doc: dict[str, Any]) -> Frame:
    return from_edges(
        doc["nodes"],
        [tuple(p) for p in doc.get("le", [])],
        [tuple(p) for p in doc.get("r", [])],
    )


def load(path: str | Path) -> Frame:
    with open(path) as handle:
        return from_doc(json.load(handle))


def save(f: Frame, path: str | Path) -> None:
    with open(path, "w") as handle:
        json.dump(to_doc(f), handle, indent=2)
        handle.write("\n")


def frame_hash(f: Frame) -> str:
    """Content hash of the canonical JSON document."""
    blob = json.dumps(to_doc(f), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def to_dot(f: Frame, name: str = "frame") -> str:
    """Graphviz source; order covers in blue, R edges in red."""
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    for node in f.nodes:
        lines.append(f'  "{node}";')
    for a, b in cover_pairs(f):
        lines.append(f'  "{a}" -> "{b}" [color=blue];')
    for a, b in f.r_pairs():
        lines.append(f'  "{a}" -> "{b}" [color=red];')
    lines.append("}")
    return "\n".join(lines) + "\n"
