"""Formula evaluation and brute-force validity on finite frames.

Validity is decided on the dual upset algebra: assignments range over the
algebra elements, and a formula is valid when every assignment evaluates
to top.  Assignment sweeps run vectorized over a full grid, in canonical
order (variables sorted by name, elements in algebra order), so the first
reported counter-assignment is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from . import formula as fm
from .algebra import FiniteAlgebra, UpsetAlgebra, dual_algebra
from .errors import FskitError
from .formula import Formula
from .frame import Frame

DEFAULT_BUDGET = 10**8


class UnboundVariable(FskitError):
    pass


class BudgetExceeded(FskitError):
    pass


def evaluate(phi: Formula, alg: UpsetAlgebra, assignment: Mapping[str, int]) -> int:
    """Value of `phi` under an assignment of algebra element indices."""
    ops = alg.ops
    if isinstance(phi, fm.Var):
        try:
            return assignment[phi.name]
        except KeyError:
            raise UnboundVariable(f"no value assigned to variable {phi.name!r}") from None
    if isinstance(phi, fm.Bot):
        return ops.bot
    if isinstance(phi, fm.Top):
        return ops.top
    if isinstance(phi, fm.And):
        return ops.meet[evaluate(phi.left, alg, assignment)][evaluate(phi.right, alg, assignment)]
    if isinstance(phi, fm.Or):
        return ops.join[evaluate(phi.left, alg, assignment)][evaluate(phi.right, alg, assignment)]
    if isinstance(phi, fm.Implies):
        return ops.himp[evaluate(phi.left, alg, assignment)][evaluate(phi.right, alg, assignment)]
    if isinstance(phi, fm.Box):
        return ops.box[evaluate(phi.child, alg, assignment)]
    if isinstance(phi, fm.Dia):
        return ops.dia[evaluate(phi.child, alg, assignment)]
    raise TypeError(f"not a formula: {phi!r}")


class _ArrayOps:
    """Operation tables as numpy arrays, for grid sweeps."""

    __slots__ = ("meet", "join", "himp", "box", "dia", "bot", "top")

    def __init__(self, ops: FiniteAlgebra):
        self.meet = np.asarray(ops.meet, dtype=np.int32)
        self.join = np.asarray(ops.join, dtype=np.int32)
        self.himp = np.asarray(ops.himp, dtype=np.int32)
        self.box = np.asarray(ops.box, dtype=np.int32)
        self.dia = np.asarray(ops.dia, dtype=np.int32)
        self.bot = ops.bot
        self.top = ops.top

    def eval(self, phi: Formula, env: Mapping[str, np.ndarray], shape: tuple[int, ...]) -> np.ndarray:
        if isinstance(phi, fm.Var):
            try:
                return env[phi.name]
            except KeyError:
                raise UnboundVariable(f"no value assigned to variable {phi.name!r}") from None
        if isinstance(phi, fm.Bot):
            return np.full(shape, self.bot, dtype=np.int32)
        if isinstance(phi, fm.Top):
            return np.full(shape, self.top, dtype=np.int32)
        if isinstance(phi, fm.And):
            return self.meet[self.eval(phi.left, env, shape), self.eval(phi.right, env, shape)]
        if isinstance(phi, fm.Or):
            return self.join[self.eval(phi.left, env, shape), self.eval(phi.right, env, shape)]
        if isinstance(phi, fm.Implies):
            return self.himp[self.eval(phi.left, env, shape), self.eval(phi.right, env, shape)]
        if isinstance(phi, fm.Box):
            return self.box[self.eval(phi.child, env, shape)]
        if isinstance(phi, fm.Dia):
            return self.dia[self.eval(phi.child, env, shape)]
        raise TypeError(f"not a formula: {phi!r}")


@dataclass(frozen=True, slots=True)
class ValidityResult:
    valid: bool
    counter_assignment: dict[str, tuple[str, ...]] | None

    def to_doc(self) -> dict[str, Any]:
        counter = None
        if self.counter_assignment is not None:
            counter = {v: list(u) for v, u in self.counter_assignment.items()}
        return {"valid": self.valid, "counter_assignment": counter}


def is_valid_on_algebra(phi: Formula, alg: UpsetAlgebra, budget: int = DEFAULT_BUDGET) -> ValidityResult:
    ops = alg.ops
    variables = fm.variables(phi)
    n = ops.size
    count = n ** len(variables)
    if count > budget:
        raise BudgetExceeded(f"{count} assignments exceed the budget of {budget}")

    if not variables:
        value = evaluate(phi, alg, {})
        return ValidityResult(True, None) if value == ops.top else ValidityResult(False, {})

    arrays = _ArrayOps(ops)
    shape = (n,) * len(variables)
    grids = np.indices(shape, dtype=np.int32)
    env = {v: grids[k] for k, v in enumerate(variables)}
    values = arrays.eval(phi, env, shape)
    failing = values != ops.top
    if not failing.any():
        return ValidityResult(True, None)
    first = np.argwhere(failing)[0]
    counter = {v: alg.element_nodes(int(first[k])) for k, v in enumerate(variables)}
    return ValidityResult(False, counter)


def is_valid(phi: Formula, f: Frame, budget: int = DEFAULT_BUDGET) -> ValidityResult:
    """Frame validity by exhaustive sweep over upset assignments."""
    return is_valid_on_algebra(phi, dual_algebra(f), budget)


AXIOM_SCHEMES: dict[str, tuple[tuple[str, str], ...]] = {
    "IK": (
        ("box_meet", "box (p & q) <-> box p & box q"),
        ("box_top", "box T"),
        ("dia_join", "dia (p | q) <-> dia p | dia q"),
        ("dia_bot", "dia F <-> F"),
        ("connection_dia_imp", "dia (p -> q) -> (box p -> dia q)"),
        ("connection_imp_box", "(dia p -> box q) -> box (p -> q)"),
    ),
}
AXIOM_SCHEMES["IKT"] = AXIOM_SCHEMES["IK"] + (
    ("box_t", "box p -> p"),
    ("dia_t", "p -> dia p"),
)
AXIOM_SCHEMES["IK4"] = AXIOM_SCHEMES["IK"] + (
    ("box_4", "box p -> box box p"),
    ("dia_4", "dia dia p -> dia p"),
)
AXIOM_SCHEMES["IS4"] = AXIOM_SCHEMES["IKT"] + AXIOM_SCHEMES["IK4"][len(AXIOM_SCHEMES["IK"]):]

LOGICS = tuple(AXIOM_SCHEMES)


@dataclass(frozen=True, slots=True)
class SuiteReport:
    logic: str
    results: tuple[tuple[str, ValidityResult], ...]

    @property
    def passed(self) -> bool:
        return all(r.valid for _, r in self.results)

    def __getitem__(self, name: str) -> ValidityResult:
        for key, result in self.results:
            if key == name:
                return result
        raise KeyError(name)

    def to_doc(self) -> dict[str, Any]:
        return {
            "logic": self.logic,
            "passed": self.passed,
            "axioms": [{"name": k, **r.to_doc()} for k, r in self.results],
        }


def axiom_suite(f: Frame, logic: str, budget: int = DEFAULT_BUDGET) -> SuiteReport:
    """Validity of every axiom scheme of the logic on the frame."""
    if logic not in AXIOM_SCHEMES:
        raise ValueError(f"unknown logic {logic!r}; choose from {', '.join(AXIOM_SCHEMES)}")
    alg = dual_algebra(f)
    results = []
    for name, text in AXIOM_SCHEMES[logic]:
        results.append((name, is_valid_on_algebra(fm.parse(text), alg, budget)))
    return SuiteReport(logic, tuple(results))
