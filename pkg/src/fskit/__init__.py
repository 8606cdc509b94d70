"""Finite-model toolkit for Fischer-Servi intuitionistic modal logics."""

from .algebra import (
    FiniteAlgebra,
    ModalFilter,
    UpsetAlgebra,
    check_fs_algebra,
    congruence_filter_bijection_check,
    dual_algebra,
    modal_filter_generated,
    quotient_by_modal_filter,
)
from .amalgam import (
    AlgebraHom,
    CoVFormation,
    Inconclusive,
    RefutationCertificate,
    chase_refute,
    check_coamalgam,
    check_pullback_properties,
    check_superamalgam,
    pullback,
    replay_refutation,
    validate_formation,
)
from .counterexample import paper_formation, reflexive_variant, run_paper_demo
from .errors import FskitError
from .formula import Formula, parse, render, substitute
from .frame import (
    ConditionReport,
    Frame,
    check_fs_conditions,
    check_ik_compatibility,
    classify,
    from_edges,
    is_fs_frame,
    is_fs_space_finite,
    reflexive_closure,
)
from .morphism import FrameMap, check_fs_morphism, check_ik_morphism, compose, is_surjective
from .semantics import axiom_suite, evaluate, is_valid

__version__ = "0.1.0"

__all__ = [
    "AlgebraHom",
    "CoVFormation",
    "ConditionReport",
    "FiniteAlgebra",
    "Formula",
    "Frame",
    "FrameMap",
    "FskitError",
    "Inconclusive",
    "ModalFilter",
    "RefutationCertificate",
    "UpsetAlgebra",
    "axiom_suite",
    "chase_refute",
    "check_coamalgam",
    "check_fs_algebra",
    "check_fs_conditions",
    "check_fs_morphism",
    "check_ik_compatibility",
    "check_ik_morphism",
    "check_pullback_properties",
    "check_superamalgam",
    "classify",
    "compose",
    "congruence_filter_bijection_check",
    "dual_algebra",
    "evaluate",
    "from_edges",
    "is_fs_frame",
    "is_fs_space_finite",
    "is_surjective",
    "is_valid",
    "modal_filter_generated",
    "paper_formation",
    "parse",
    "pullback",
    "quotient_by_modal_filter",
    "reflexive_closure",
    "reflexive_variant",
    "render",
    "replay_refutation",
    "run_paper_demo",
    "substitute",
    "validate_formation",
]
