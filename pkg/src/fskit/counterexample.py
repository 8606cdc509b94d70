"""The bundled co-V-formation witnessing the failure of co-amalgamation.

Three frames Z (base), X and Y with surjective Fischer-Servi morphisms
f: X -> Z and g: Y -> Z.  The formation validates in FS mode, every frame
validates the IK axiom schemes, and the chase refutes the existence of a
co-amalgam of any size; the reflexive variants do the same for IKT/IS4.
Together these replay the interpolation counterexample for IK and its
neighbours IKT, IK4, IS4, IGL.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Callable

from . import frame as fr
from .amalgam import (
    CoVFormation,
    RefutationCertificate,
    chase_refute,
    check_coamalgam,
    pullback,
    validate_formation,
)
from .frame import Frame, classify, from_edges, is_fs_space_finite, reflexive_closure
from .morphism import FrameMap, check_fs_morphism, is_surjective
from .semantics import axiom_suite

Z_NODES = ("z0", "z1", "z2", "k0", "k2", "k3", "k4")
Z_LE = (("z0", "z2"), ("z1", "k0"), ("z1", "k2"), ("z0", "k3"), ("z0", "k4"))
Z_R = (("z0", "z1"), ("z2", "k0"), ("z2", "k2"), ("k3", "k0"), ("k4", "k2"))

X_NODES = ("x0", "x1", "x2", "a0", "a1", "a2", "a3", "a4")
X_LE = (("x1", "a0"), ("x0", "x2"), ("x1", "a2"), ("x0", "a3"), ("x0", "a4"))
X_R = (("x0", "x1"), ("x2", "a0"), ("x2", "a1"), ("a3", "a0"), ("a4", "a2"))

Y_NODES = ("y0", "y1", "y2", "b0", "b1", "b2", "b3", "b4")
Y_LE = (("y0", "y2"), ("y1", "b2"), ("y1", "b0"), ("y0", "b3"), ("y0", "b4"))
Y_R = (("y0", "y1"), ("y2", "b2"), ("y2", "b1"), ("b3", "b0"), ("b4", "b2"))

F_TABLE = {
    "x0": "z0", "x1": "z1", "x2": "z2",
    "a0": "k0", "a1": "k2", "a2": "k2", "a3": "k3", "a4": "k4",
}
G_TABLE = {
    "y0": "z0", "y1": "z1", "y2": "z2",
    "b0": "k0", "b1": "k0", "b2": "k2", "b3": "k3", "b4": "k4",
}


def frame_z() -> Frame:
    return from_edges(Z_NODES, Z_LE, Z_R)


def frame_x() -> Frame:
    return from_edges(X_NODES, X_LE, X_R)


def frame_y() -> Frame:
    return from_edges(Y_NODES, Y_LE, Y_R)


def paper_formation() -> CoVFormation:
    """The formation (Z, X, Y, f, g), in FS mode."""
    z, x, y = frame_z(), frame_x(), frame_y()
    return CoVFormation(z, x, y, FrameMap(x, z, F_TABLE), FrameMap(y, z, G_TABLE), "FS")


def reflexive_variant() -> CoVFormation:
    """The same formation with R made reflexive on all three frames."""
    z = reflexive_closure(frame_z())
    x = reflexive_closure(frame_x())
    y = reflexive_closure(frame_y())
    return CoVFormation(z, x, y, FrameMap(x, z, F_TABLE), FrameMap(y, z, G_TABLE), "FS")


EXPECTED_CONTRADICTION = {
    "left_image": "a0",
    "right_image": "b2",
    "left_base": "k0",
    "right_base": "k2",
}


@dataclass(frozen=True, slots=True)
class DemoStep:
    step: str
    paper_ref: str
    status: str
    details: dict[str, Any]

    def to_doc(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "paper_ref": self.paper_ref,
            "status": self.status,
            "details": self.details,
        }


@dataclass(frozen=True, slots=True)
class DemoReport:
    steps: tuple[DemoStep, ...]

    @property
    def ok(self) -> bool:
        return all(s.status == "pass" for s in self.steps)

    def to_doc(self) -> list[dict[str, Any]]:
        return [s.to_doc() for s in self.steps]

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), indent=2)

    def render_table(self) -> str:
        width = max(len(s.step) for s in self.steps)
        lines = []
        for s in self.steps:
            mark = "PASS" if s.status == "pass" else "FAIL"
            lines.append(f"{mark}  {s.step.ljust(width)}  {s.paper_ref}")
        verdict = "all steps passed" if self.ok else "SOME STEPS FAILED"
        lines.append(verdict)
        return "\n".join(lines) + "\n"


def _expected_certificate(result) -> tuple[bool, dict[str, Any]]:
    if not isinstance(result, RefutationCertificate):
        return False, {"outcome": "inconclusive", "reason": result.reason}
    shape_ok = (
        result.created_elements == 4
        and result.case_splits == 0
        and all(result.contradiction.get(k) == v for k, v in EXPECTED_CONTRADICTION.items())
    )
    return shape_ok, result.to_doc()


def run_paper_demo(
    formation: CoVFormation | None = None,
    variant: CoVFormation | None = None,
) -> DemoReport:
    """Replay every lemma- and theorem-level check as one structured report.

    Steps are additive: a failing or crashing step turns its line red and
    the demo continues, so single regressions stay localizable.
    """
    base = formation if formation is not None else paper_formation()
    refl = variant if variant is not None else reflexive_variant()
    steps: list[DemoStep] = []

    def run(step: str, claim: str, thunk: Callable[[], tuple[bool, dict[str, Any]]]) -> None:
        try:
            ok, details = thunk()
        except Exception as exc:  # a crash is itself a red line
            ok, details = False, {"error": f"{type(exc).__name__}: {exc}"}
        steps.append(DemoStep(step, claim, "pass" if ok else "fail", details))

    for label, f in (("z", base.base), ("x", base.left), ("y", base.right)):
        run(
            f"frame-{label}-fs-space",
            f"frame {label.upper()} is a finite Fischer-Servi space",
            lambda f=f: (lambda c: (c.holds, c.to_doc()))(is_fs_space_finite(f)),
        )

    for label, m in (("f", base.fmap), ("g", base.gmap)):
        def check_map(m=m):
            report = check_fs_morphism(m)
            surj, missing = is_surjective(m)
            ok = report.holds and surj
            return ok, {"morphism": report.to_doc(), "surjective": surj, "uncovered": list(missing)}
        run(f"morphism-{label}", f"{label} is a surjective Fischer-Servi morphism", check_map)

    def classify_all():
        details = {}
        ok = True
        for label, f in (("z", base.base), ("x", base.left), ("y", base.right)):
            reports = classify(f)
            details[label] = {
                "transitive": reports["TRANSITIVE"].to_doc(),
                "igl_wf": reports["IGL_WF"].to_doc(),
            }
            ok = ok and reports["TRANSITIVE"].holds and reports["IGL_WF"].holds
        return ok, details
    run("classify-base", "X, Y, Z are transitive with a well-founded order-R composite", classify_all)

    for label, f in (("z", base.base), ("x", base.left), ("y", base.right)):
        run(
            f"axioms-ik-{label}",
            f"frame {label.upper()} validates the IK axiom schemes",
            lambda f=f: (lambda s: (s.passed, s.to_doc()))(axiom_suite(f, "IK")),
        )

    run(
        "chase-base",
        "the formation (Z, X, Y, f, g) admits no co-amalgam",
        lambda: _expected_certificate(chase_refute(base)),
    )

    run(
        "variant-formation",
        "the reflexive variants form a valid Fischer-Servi formation",
        lambda: (lambda r: (r.holds, r.to_doc()))(validate_formation(refl)),
    )

    def variant_reflexive():
        details = {}
        ok = True
        for label, f in (("z", refl.base), ("x", refl.left), ("y", refl.right)):
            report = classify(f)["REFLEXIVE"]
            details[label] = report.to_doc()
            ok = ok and report.holds
        return ok, details
    run("variant-reflexive", "the variant relations are reflexive", variant_reflexive)

    for logic in ("IKT", "IS4"):
        def check_logic(logic=logic):
            details = {}
            ok = True
            for label, f in (("z", refl.base), ("x", refl.left), ("y", refl.right)):
                suite = axiom_suite(f, logic)
                details[label] = suite.to_doc()
                ok = ok and suite.passed
            return ok, details
        run(
            f"axioms-{logic.lower()}-variant",
            f"the reflexive variants validate the {logic} axiom schemes",
            check_logic,
        )

    def chase_variant():
        result = chase_refute(refl)
        if not isinstance(result, RefutationCertificate):
            return False, {"outcome": "inconclusive", "reason": result.reason}
        ok = result.case_splits == 0 and all(
            result.contradiction.get(k) == v for k, v in EXPECTED_CONTRADICTION.items()
        )
        return ok, result.to_doc()
    run("chase-variant", "the reflexive variant admits no co-amalgam", chase_variant)

    def pullback_fails():
        pb, p1, p2 = pullback(base)
        report = check_coamalgam(base, pb, p1, p2)
        return not report.holds, {
            "pullback_nodes": len(pb),
            "first_failure": report.first_failure(),
            "report": report.to_doc(),
        }
    run("pullback-not-coamalgam", "the pullback of (f, g) is not a co-amalgam", pullback_fails)

    return DemoReport(tuple(steps))
