"""Maps between frames and the morphism condition checks.

The two back conditions for the relation are deliberately asymmetric, as
they come: the weak back condition bounds the witness from above
(f(x) R z gives x R x' with z <= f(x')), while the strong back condition
bounds it from below (f(x) <= m and m R z give x <= x' R x'' with
f(x'') <= z).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from . import frame as fr
from .errors import FskitError
from .frame import ConditionReport, Frame, bits


class SourceTargetMismatch(FskitError):
    pass


class FrameMap:
    """Total map between frame carriers."""

    __slots__ = ("source", "target", "img")

    def __init__(self, source: Frame, target: Frame, table: Mapping[str, str]):
        missing = [n for n in source.nodes if n not in table]
        if missing:
            raise SourceTargetMismatch(f"map not total; missing {missing[0]!r}")
        extra = [n for n in table if n not in source._index]
        if extra:
            raise SourceTargetMismatch(f"map defined on non-source node {extra[0]!r}")
        img = []
        for name in source.nodes:
            value = table[name]
            if value not in target._index:
                raise SourceTargetMismatch(f"image {value!r} is not a target node")
            img.append(target.index(value))
        self.source = source
        self.target = target
        self.img = tuple(img)

    def __call__(self, name: str) -> str:
        return self.target.nodes[self.img[self.source.index(name)]]

    def table(self) -> dict[str, str]:
        return {n: self.target.nodes[self.img[i]] for i, n in enumerate(self.source.nodes)}

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FrameMap)
            and self.source == other.source
            and self.target == other.target
            and self.img == other.img
        )

    def __hash__(self) -> int:
        return hash((self.source, self.target, self.img))

    def __repr__(self) -> str:
        return f"FrameMap({len(self.source)} -> {len(self.target)} nodes)"


def identity(f: Frame) -> FrameMap:
    return FrameMap(f, f, {n: n for n in f.nodes})


def compose(m1: FrameMap, m2: FrameMap) -> FrameMap:
    """Pointwise composition: first m1, then m2."""
    if m1.target != m2.source:
        raise SourceTargetMismatch("target of first map differs from source of second")
    table = {n: m2.target.nodes[m2.img[m1.img[i]]] for i, n in enumerate(m1.source.nodes)}
    return FrameMap(m1.source, m2.target, table)


@dataclass(frozen=True, slots=True)
class MorphismReport:
    conditions: tuple[ConditionReport, ...]

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.conditions)

    def first_failure(self) -> ConditionReport | None:
        for c in self.conditions:
            if not c.holds:
                return c
        return None

    def __getitem__(self, name: str) -> ConditionReport:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_doc(self) -> dict[str, Any]:
        return {"holds": self.holds, "conditions": [c.to_doc() for c in self.conditions]}


def _check_monotone(m: FrameMap) -> ConditionReport:
    src, tgt = m.source, m.target
    for x in range(len(src)):
        for y in bits(src.up[x]):
            if not tgt.up[m.img[x]] >> m.img[y] & 1:
                return ConditionReport("MONOTONE", False, (src.nodes[x], src.nodes[y]))
    return ConditionReport("MONOTONE", True)


def _check_le_back(m: FrameMap) -> ConditionReport:
    """f(x) <= b implies some x' >= x with f(x') = b."""
    src, tgt = m.source, m.target
    for x in range(len(src)):
        for b in bits(tgt.up[m.img[x]]):
            if not any(m.img[xp] == b for xp in bits(src.up[x])):
                return ConditionReport("LE_BACK", False, (src.nodes[x], tgt.nodes[b]))
    return ConditionReport("LE_BACK", True)


def _check_r_forth(m: FrameMap) -> ConditionReport:
    src, tgt = m.source, m.target
    for x in range(len(src)):
        for y in bits(src.rsucc[x]):
            if not tgt.rsucc[m.img[x]] >> m.img[y] & 1:
                return ConditionReport("R_FORTH", False, (src.nodes[x], src.nodes[y]))
    return ConditionReport("R_FORTH", True)


def _check_weak_back(m: FrameMap) -> ConditionReport:
    """f(x) R z implies some x R x' with z <= f(x')."""
    src, tgt = m.source, m.target
    for x in range(len(src)):
        for z in bits(tgt.rsucc[m.img[x]]):
            if not any(tgt.up[z] >> m.img[xp] & 1 for xp in bits(src.rsucc[x])):
                return ConditionReport("WEAK_BACK", False, (src.nodes[x], tgt.nodes[z]))
    return ConditionReport("WEAK_BACK", True)


def _check_strong_back(m: FrameMap) -> ConditionReport:
    """f(x) <= m_ and m_ R z imply x <= x' R x'' with f(x'') <= z."""
    src, tgt = m.source, m.target
    for x in range(len(src)):
        for mid in bits(tgt.up[m.img[x]]):
            for z in bits(tgt.rsucc[mid]):
                found = False
                for xp in bits(src.up[x]):
                    for xpp in bits(src.rsucc[xp]):
                        if tgt.up[m.img[xpp]] >> z & 1:
                            found = True
                            break
                    if found:
                        break
                if not found:
                    return ConditionReport(
                        "STRONG_BACK", False, (src.nodes[x], tgt.nodes[mid], tgt.nodes[z])
                    )
    return ConditionReport("STRONG_BACK", True)


def _check_r_bounded_back(m: FrameMap) -> ConditionReport:
    """f(x) R y implies some x R y' with f(y') = y."""
    src, tgt = m.source, m.target
    for x in range(len(src)):
        for y in bits(tgt.rsucc[m.img[x]]):
            if not any(m.img[yp] == y for yp in bits(src.rsucc[x])):
                return ConditionReport("R_BOUNDED_BACK", False, (src.nodes[x], tgt.nodes[y]))
    return ConditionReport("R_BOUNDED_BACK", True)


def check_fs_morphism(m: FrameMap) -> MorphismReport:
    """All five Fischer-Servi morphism conditions; never short-circuits."""
    return MorphismReport(
        (
            _check_monotone(m),
            _check_le_back(m),
            _check_r_forth(m),
            _check_weak_back(m),
            _check_strong_back(m),
        )
    )


def check_ik_morphism(m: FrameMap) -> MorphismReport:
    """Order p-morphism plus R-bounded morphism conditions."""
    return MorphismReport(
        (
            _check_monotone(m),
            _check_le_back(m),
            _check_r_forth(m),
            _check_r_bounded_back(m),
        )
    )


def is_surjective(m: FrameMap) -> tuple[bool, tuple[str, ...]]:
    """Whether every target node has a preimage; returns the uncovered nodes."""
    covered = 0
    for i in m.img:
        covered |= 1 << i
    uncovered = m.target.full_mask() & ~covered
    return not uncovered, m.target.names(uncovered)


# --- JSON ---

def to_doc(m: FrameMap, inline_frames: bool = True) -> dict[str, Any]:
    doc: dict[str, Any] = {}
    if inline_frames:
        doc["from"] = fr.to_doc(m.source)
        doc["to"] = fr.to_doc(m.target)
    doc["from_hash"] = fr.frame_hash(m.source)
    doc["to_hash"] = fr.frame_hash(m.target)
    doc["map"] = m.table()
    return doc


def from_doc(
    doc: dict[str, Any],
    source: Frame | None = None,
    target: Frame | None = None,
    base_dir: str | Path = ".",
) -> FrameMap:
    """Load a morphism document.

    Frames may be given inline, as paths relative to `base_dir`, or passed
    in directly; a stored content hash, when present, must match the frame
    actually used.
    """

    def resolve(key: str, given: Frame | None) -> Frame:
        if given is not None:
            loaded = given
        elif key in doc:
            spec = doc[key]
            if isinstance(spec, str):
                loaded = fr.load(Path(base_dir) / spec)
            else:
                loaded = fr.from_doc(spec)
        else:
            raise SourceTargetMismatch(f"no {key!r} frame given for morphism document")
        want = doc.get(f"{key}_hash")
        if want is not None and fr.frame_hash(loaded) != want:
            raise SourceTargetMismatch(f"{key!r} frame does not match the stored content hash")
        return loaded

    table = doc["map"] if "map" in doc else doc
    return FrameMap(resolve("from", source), resolve("to", target), table)


def load(path: str | Path, source: Frame | None = None, target: Frame | None = None) -> FrameMap:
    path = Path(path)
    with open(path) as handle:
        return from_doc(json.load(handle), source, target, base_dir=path.parent)


def save(m: FrameMap, path: str | Path) -> None:
    with open(path, "w") as handle:
        json.dump(to_doc(m), handle, indent=2)
        handle.write("\n")
