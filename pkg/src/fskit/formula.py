"""Modal formula language over (and, or, ->, box, dia, bot, top).

Concrete syntax (tightest first): unary `box`/`[]`, `dia`/`<>`, `~`; then
`&`; then `|`; then `->` (right associative); then `<->` (non associative).
`~p` is sugar for `p -> F` and `p <-> q` for `(p -> q) & (q -> p)`; both are
desugared at parse time, so the AST has exactly the seven core connectives.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import FskitError


class FormulaSyntaxError(FskitError):
    """Raised on malformed input, with position and the expected token set."""

    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        self.position = position
        self.expected = tuple(expected)
        detail = f"{message} at position {position}"
        if expected:
            detail += " (expected " + " or ".join(expected) + ")"
        super().__init__(detail)


class Formula:
    """Base class for AST nodes; all nodes are immutable and hashable."""

    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, slots=True)
class Var(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Bot(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Box(Formula):
    child: Formula


@dataclass(frozen=True, slots=True)
class Dia(Formula):
    child: Formula


def variables(f: Formula) -> tuple[str, ...]:
    """All variable names occurring in `f`, sorted."""
    seen: set[str] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            seen.add(node.name)
        elif isinstance(node, (And, Or, Implies)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (Box, Dia)):
            stack.append(node.child)
    return tuple(sorted(seen))


def size(f: Formula) -> int:
    """Number of AST nodes."""
    if isinstance(f, (Var, Bot, Top)):
        return 1
    if isinstance(f, (Box, Dia)):
        return 1 + size(f.child)
    return 1 + size(f.left) + size(f.right)


def substitute(f: Formula, s: Mapping[str, Formula]) -> Formula:
    """Simultaneous substitution; variables outside `s` are unchanged."""
    if isinstance(f, Var):
        return s.get(f.name, f)
    if isinstance(f, (Bot, Top)):
        return f
    if isinstance(f, And):
        return And(substitute(f.left, s), substitute(f.right, s))
    if isinstance(f, Or):
        return Or(substitute(f.left, s), substitute(f.right, s))
    if isinstance(f, Implies):
        return Implies(substitute(f.left, s), substitute(f.right, s))
    if isinstance(f, Box):
        return Box(substitute(f.child, s))
    if isinstance(f, Dia):
        return Dia(substitute(f.child, s))
    raise TypeError(f"not a formula: {f!r}")


# --- parsing ---

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<iff><->)|(?P<imp>->)|(?P<and>&)|(?P<or>\|)|(?P<not>~)"
    r"|(?P<boxsym>\[\])|(?P<diasym><>)|(?P<lpar>\()|(?P<rpar>\))"
    r"|(?P<ident>[a-zA-Z][a-zA-Z0-9_]*))"
)

_KEYWORDS = {"box": "box", "dia": "dia", "T": "top", "F": "bot"}


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_pos = len(text) - len(stripped)
            raise FormulaSyntaxError(f"unexpected character {text[bad_pos]!r}", bad_pos)
        kind = m.lastgroup
        assert kind is not None
        value = m.group(kind)
        tok_pos = m.end() - len(value)
        if kind == "ident":
            kind = _KEYWORDS.get(value, "ident")
        elif kind == "boxsym":
            kind = "box"
        elif kind == "diasym":
            kind = "dia"
        tokens.append(_Token(kind, value, tok_pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise FormulaSyntaxError(f"unexpected {tok.text or 'end of input'!r}", tok.pos, (what,))
        return self.take()

    def formula(self) -> Formula:
        left = self.imp()
        if self.peek().kind == "iff":
            self.take()
            right = self.imp()
            return And(Implies(left, right), Implies(right, left))
        return left

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek().kind == "imp":
            self.take()
            return Implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        out = self.conj()
        while self.peek().kind == "or":
            self.take()
            out = Or(out, self.conj())
        return out

    def conj(self) -> Formula:
        out = self.unary()
        while self.peek().kind == "and":
            self.take()
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "box":
            self.take()
            return Box(self.unary())
        if tok.kind == "dia":
            self.take()
            return Dia(self.unary())
        if tok.kind == "not":
            self.take()
            return Implies(self.unary(), Bot())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "ident":
            self.take()
            return Var(tok.text)
        if tok.kind == "top":
            self.take()
            return Top()
        if tok.kind == "bot":
            self.take()
            return Bot()
        if tok.kind == "lpar":
            self.take()
            inner = self.formula()
            self.expect("rpar", "')'")
            return inner
        raise FormulaSyntaxError(
            f"unexpected {tok.text or 'end of input'!r}",
            tok.pos,
            ("identifier", "'T'", "'F'", "'('", "'box'", "'dia'", "'~'"),
        )


def parse(text: str) -> Formula:
    """Parse concrete syntax into the seven-connective AST."""
    parser = _Parser(text)
    out = parser.formula()
    tok = parser.peek()
    if tok.kind != "end":
        raise FormulaSyntaxError(f"trailing input {tok.text!r}", tok.pos, ("end of input",))
    return out


# --- printing ---

# precedence levels: imp=1, or=2, and=3, unary=4, atom=5
def _level(f: Formula) -> int:
    if isinstance(f, Implies):
        return 1
    if isinstance(f, Or):
        return 2
    if isinstance(f, And):
        return 3
    if isinstance(f, (Box, Dia)):
        return 4
    return 5


def _render(f: Formula, minimum: int) -> str:
    lvl = _level(f)
    if isinstance(f, Var):
        body = f.name
    elif isinstance(f, Top):
        body = "T"
    elif isinstance(f, Bot):
        body = "F"
    elif isinstance(f, Box):
        body = "box " + _render(f.child, 4)
    elif isinstance(f, Dia):
        body = "dia " + _render(f.child, 4)
    elif isinstance(f, And):
        body = _render(f.left, 3) + " & " + _render(f.right, 4)
    elif isinstance(f, Or):
        body = _render(f.left, 2) + " | " + _render(f.right, 3)
    elif isinstance(f, Implies):
        body = _render(f.left, 2) + " -> " + _render(f.right, 1)
    else:
        raise TypeError(f"not a formula: {f!r}")
    if lvl < minimum:
        return "(" + body + ")"
    return body


def render(f: Formula) -> str:
    """Print with minimal parentheses; `parse(render(f))` equals `f`."""
    return _render(f, 1)
