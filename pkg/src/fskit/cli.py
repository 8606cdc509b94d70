"""Command-line interface over the JSON file formats.

Exit codes: 0 when all checks of the invocation pass, 1 when a check
fails, 2 on input or parse errors.  All output is deterministic; the
randomized property suites live in the test harness, not here.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

from . import algebra as al
from . import amalgam as am
from . import counterexample as cx
from . import formula as fm
from . import frame as fr
from . import morphism as mo
from . import semantics as se
from .errors import FskitError

PASS, FAIL, USAGE = 0, 1, 2


def _emit(doc: Any, fmt: str, table: str | None = None) -> None:
    if fmt == "table" and table is not None:
        sys.stdout.write(table)
    else:
        print(json.dumps(doc, indent=2))


def _aggregate_table(doc: dict[str, Any]) -> str:
    lines = [f"{doc['name']}: {'pass' if doc['holds'] else 'FAIL'}"]
    for entry in doc["entries"]:
        mark = "PASS" if entry["holds"] else "FAIL"
        lines.append(f"  {mark}  {entry['check']}")
    return "\n".join(lines) + "\n"


def _load_formation(args) -> am.CoVFormation:
    formation = am.load_formation(args.formation)
    if getattr(args, "mode", None):
        formation = am.CoVFormation(
            formation.base, formation.left, formation.right,
            formation.fmap, formation.gmap, args.mode,
        )
    return formation


def cmd_check_frame(args) -> int:
    f = fr.load(args.frame)
    mode = args.mode or "FS"
    if mode == "FS":
        check = fr.is_fs_space_finite(f)
        reports = list(check.reports)
    else:
        report = fr.check_ik_compatibility(f)
        check = fr.FrameCheck(report.holds, (report,))
        reports = [report]
    classes = fr.classify(f)
    doc = {
        "frame": args.frame,
        "mode": mode,
        "holds": check.holds,
        "conditions": [r.to_doc() for r in reports],
        "classification": [classes[k].to_doc() for k in ("REFLEXIVE", "TRANSITIVE", "PREORDER", "IGL_WF")],
    }
    rows = [f"frame {args.frame} [{mode}]: {'pass' if check.holds else 'FAIL'}"]
    for r in reports + [classes[k] for k in ("REFLEXIVE", "TRANSITIVE", "PREORDER", "IGL_WF")]:
        mark = "yes" if r.holds else "no "
        witness = "" if r.witness is None else f"  witness: {', '.join(r.witness)}"
        rows.append(f"  {r.name:<12} {mark}{witness}")
    _emit(doc, args.format, "\n".join(rows) + "\n")
    if args.emit_dot:
        with open(args.emit_dot, "w") as handle:
            handle.write(fr.to_dot(f))
    return PASS if check.holds else FAIL


def cmd_check_morphism(args) -> int:
    source = fr.load(args.src) if args.src else None
    target = fr.load(args.dst) if args.dst else None
    with open(args.map) as handle:
        doc = json.load(handle)
    m = mo.from_doc(doc, source, target, base_dir=os.path.dirname(args.map) or ".")
    mode = args.mode or "FS"
    report = mo.check_fs_morphism(m) if mode == "FS" else mo.check_ik_morphism(m)
    surjective, uncovered = mo.is_surjective(m)
    out = {
        "map": args.map,
        "mode": mode,
        "holds": report.holds,
        "conditions": [c.to_doc() for c in report.conditions],
        "surjective": surjective,
        "uncovered": list(uncovered),
    }
    rows = [f"morphism {args.map} [{mode}]: {'pass' if report.holds else 'FAIL'}"]
    for c in report.conditions:
        witness = "" if c.witness is None else f"  witness: {', '.join(c.witness)}"
        rows.append(f"  {c.name:<16} {'yes' if c.holds else 'no '}{witness}")
    rows.append(f"  surjective       {'yes' if surjective else 'no'}")
    _emit(out, args.format, "\n".join(rows) + "\n")
    return PASS if report.holds else FAIL


def cmd_dual_algebra(args) -> int:
    f = fr.load(args.frame)
    alg = al.dual_algebra(f)
    doc = alg.ops.to_doc()
    doc["elements"] = [list(alg.element_nodes(i)) for i in range(len(alg))]
    _emit(doc, args.format, f"dual algebra with {len(alg)} elements\n")
    return PASS


def cmd_check_algebra(args) -> int:
    alg = al.load(args.algebra)
    report = al.check_fs_algebra(alg)
    doc = {"algebra": args.algebra, **report.to_doc()}
    rows = [f"algebra {args.algebra}: {'pass' if report.holds else 'FAIL'}"]
    for c in report.conditions:
        witness = "" if c.witness is None else f"  witness: {', '.join(c.witness)}"
        rows.append(f"  {c.name:<20} {'yes' if c.holds else 'no '}{witness}")
    _emit(doc, args.format, "\n".join(rows) + "\n")
    return PASS if report.holds else FAIL


def cmd_validity(args) -> int:
    f = fr.load(args.frame)
    phi = fm.parse(args.formula)
    result = se.is_valid(phi, f, args.budget)
    doc = {"formula": fm.render(phi), "frame": args.frame, **result.to_doc()}
    if result.valid:
        table = f"valid: {fm.render(phi)}\n"
    else:
        parts = [f"invalid: {fm.render(phi)}"]
        for var, upset in (result.counter_assignment or {}).items():
            parts.append(f"  {var} = {{{', '.join(upset)}}}")
        table = "\n".join(parts) + "\n"
    _emit(doc, args.format, table)
    return PASS if result.valid else FAIL


def cmd_axioms(args) -> int:
    f = fr.load(args.frame)
    suite = se.axiom_suite(f, args.logic, args.budget)
    doc = {"frame": args.frame, **suite.to_doc()}
    rows = [f"{args.logic} axioms on {args.frame}: {'pass' if suite.passed else 'FAIL'}"]
    for name, result in suite.results:
        rows.append(f"  {name:<20} {'valid' if result.valid else 'INVALID'}")
    _emit(doc, args.format, "\n".join(rows) + "\n")
    return PASS if suite.passed else FAIL


def cmd_pullback(args) -> int:
    formation = _load_formation(args)
    pb, p1, p2 = am.pullback(formation)
    doc = {
        "nodes": len(pb),
        "frame": fr.to_doc(pb),
        "p1": p1.table(),
        "p2": p2.table(),
    }
    _emit(doc, args.format, f"pullback with {len(pb)} nodes\n")
    if args.emit_dot:
        with open(args.emit_dot, "w") as handle:
            handle.write(fr.to_dot(pb))
    return PASS


def cmd_chase(args) -> int:
    formation = _load_formation(args)
    result = am.chase_refute(formation, args.max_elements, args.max_splits)
    if isinstance(result, am.RefutationCertificate):
        doc: dict[str, Any] = {"outcome": "refuted", "certificate": result.to_doc()}
        table = (
            f"refuted: no co-amalgam exists ({result.created_elements} elements, "
            f"{result.case_splits} splits)\n"
        )
        refuted = True
    else:
        doc = {"outcome": "inconclusive", "reason": result.reason}
        table = f"inconclusive: {result.reason}\n"
        refuted = False
    _emit(doc, args.format, table)
    if args.expect_refutation:
        return PASS if refuted else FAIL
    return PASS


def cmd_check_coamalgam(args) -> int:
    formation = _load_formation(args)
    w = fr.load(args.candidate)
    with open(args.p1) as handle:
        p1 = mo.from_doc(json.load(handle), w, formation.left, base_dir=os.path.dirname(args.p1) or ".")
    with open(args.p2) as handle:
        p2 = mo.from_doc(json.load(handle), w, formation.right, base_dir=os.path.dirname(args.p2) or ".")
    report = am.check_coamalgam(formation, w, p1, p2, args.mode or formation.mode)
    _emit(report.to_doc(), args.format, _aggregate_table(report.to_doc()))
    return PASS if report.holds else FAIL


def cmd_superamalgam(args) -> int:
    with open(args.vformation) as handle:
        doc = json.load(handle)
    algebras = {key: al.FiniteAlgebra.from_doc(doc[key]) for key in ("A", "B1", "B2", "C")}
    h1 = am.AlgebraHom(algebras["A"], algebras["B1"], doc["h1"])
    h2 = am.AlgebraHom(algebras["A"], algebras["B2"], doc["h2"])
    p1 = am.AlgebraHom(algebras["B1"], algebras["C"], doc["p1"])
    p2 = am.AlgebraHom(algebras["B2"], algebras["C"], doc["p2"])
    report = am.check_superamalgam(h1, h2, p1, p2)
    _emit(report.to_doc(), args.format, _aggregate_table(report.to_doc()))
    return PASS if report.holds else FAIL


def cmd_paper_demo(args) -> int:
    report = cx.run_paper_demo()
    _emit(report.to_doc(), args.format, report.render_table())
    return PASS if report.ok else FAIL


def _default_budget() -> int:
    env = os.environ.get("FSKIT_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise FskitError(f"FSKIT_BUDGET must be an integer, got {env!r}") from None
    return se.DEFAULT_BUDGET


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fskit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budget=False, mode=False, formation=False):
        p.add_argument("--format", choices=("json", "table"), default="json")
        if budget:
            p.add_argument("--budget", type=int, default=None, help="assignment sweep budget")
        if mode:
            p.add_argument("--mode", choices=("FS", "IK"), default=None)
        if formation:
            p.add_argument("--formation", required=True, help="formation JSON document")

    p = sub.add_parser("check-frame", help="frame conditions and classification")
    p.add_argument("frame", help="frame JSON document")
    p.add_argument("--emit-dot", default=None, help="write a DOT rendering here")
    common(p, mode=True)
    p.set_defaults(func=cmd_check_frame)

    p = sub.add_parser("check-morphism", help="morphism conditions")
    p.add_argument("--from", dest="src", default=None, help="source frame JSON")
    p.add_argument("--to", dest="dst", default=None, help="target frame JSON")
    p.add_argument("--map", required=True, help="morphism JSON document")
    common(p, mode=True)
    p.set_defaults(func=cmd_check_morphism)

    p = sub.add_parser("dual-algebra", help="dual upset algebra of a frame")
    p.add_argument("--frame", required=True)
    common(p)
    p.set_defaults(func=cmd_dual_algebra)

    p = sub.add_parser("check-algebra", help="Fischer-Servi algebra axioms")
    p.add_argument("--algebra", required=True, help="algebra JSON document")
    common(p)
    p.set_defaults(func=cmd_check_algebra)

    p = sub.add_parser("validity", help="brute-force frame validity")
    p.add_argument("--frame", required=True)
    p.add_argument("--formula", required=True)
    common(p, budget=True)
    p.set_defaults(func=cmd_validity)

    p = sub.add_parser("axioms", help="axiom suite for a logic")
    p.add_argument("--frame", required=True)
    p.add_argument("--logic", choices=se.LOGICS, required=True)
    common(p, budget=True)
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("pullback", help="pullback frame and projections")
    p.add_argument("--emit-dot", default=None)
    common(p, mode=True, formation=True)
    p.set_defaults(func=cmd_pullback)

    p = sub.add_parser("chase", help="refute co-amalgam existence")
    p.add_argument("--max-elements", type=int, default=32)
    p.add_argument("--max-splits", type=int, default=64)
    p.add_argument("--expect-refutation", action="store_true")
    common(p, mode=True, formation=True)
    p.set_defaults(func=cmd_chase)

    p = sub.add_parser("check-coamalgam", help="verify a co-amalgam candidate")
    p.add_argument("--w", dest="candidate", required=True, help="candidate frame JSON")
    p.add_argument("--p1", required=True, help="morphism JSON onto the left frame")
    p.add_argument("--p2", required=True, help="morphism JSON onto the right frame")
    common(p, mode=True, formation=True)
    p.set_defaults(func=cmd_check_coamalgam)

    p = sub.add_parser("superamalgam", help="superamalgam conditions on an algebra square")
    p.add_argument("--vformation", required=True, help="JSON with algebras A,B1,B2,C and maps h1,h2,p1,p2")
    common(p)
    p.set_defaults(func=cmd_superamalgam)

    p = sub.add_parser("paper-demo", help="replay the bundled counterexample end to end")
    common(p)
    p.set_defaults(func=cmd_paper_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "budget") and args.budget is None:
        args.budget = _default_budget()
    try:
        return args.func(args)
    except (FskitError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
