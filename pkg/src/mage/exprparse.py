"""Parser for textual PDE / function definitions over the chart coordinates.

Grammar (EBNF):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | atom ('^' nat)?
    atom   := integer | ident | '(' expr ')'

Identifiers: x1..xn, u, p1..pn, p11..pnn (i <= j), xi1..xin; any other
identifier is a free parameter.  Division is permitted and lowers to a
RationalFunction; exponents must be nonnegative integer literals.  Only
rational expressions are accepted, so everything stays exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

from .poly import MageError, MultiPoly, RationalFunction, var_sort_key


class ParseError(MageError):
    """Syntax or validation error, with the offending offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.message = message
        self.pos = pos


class VariableKind(Enum):
    BASE = "base-x"
    UNKNOWN = "unknown-u"
    FIRST_JET = "first-jet-p"
    SECOND_JET = "second-jet-p"
    COVECTOR = "covector-xi"
    PARAMETER = "parameter"


@dataclass(frozen=True)
class Var:
    name: str
    kind: VariableKind


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Neg:
    child: "Node"


Node = Union[Var, Const, BinOp, Pow, Neg]


_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_INT = re.compile(r"\d+")
_JET2 = re.compile(r"^p(\d)(\d)$")
_JET1 = re.compile(r"^p(\d)$")
_COV = re.compile(r"^xi(\d+)$")
_BASE = re.compile(r"^x(\d+)$")


def classify_name(name: str, n: int) -> VariableKind:
    """Resolve an identifier to its VariableKind, validating indices against n."""
    m = _JET2.match(name)
    if m:
        i, j = int(m.group(1)), int(m.group(2))
        if i < 1 or j < 1 or i > n or j > n:
            raise ParseError(f"second-jet index out of range in {name!r} (n={n})", 0)
        if i > j:
            raise ParseError(f"second-jet variable {name!r} must have i <= j (use p{j}{i})", 0)
        return VariableKind.SECOND_JET
    m = _JET1.match(name)
    if m:
        i = int(m.group(1))
        if i < 1 or i > n:
            raise ParseError(f"first-jet index out of range in {name!r} (n={n})", 0)
        return VariableKind.FIRST_JET
    m = _COV.match(name)
    if m:
        i = int(m.group(1))
        if i < 1 or i > n:
            raise ParseError(f"covector index out of range in {name!r} (n={n})", 0)
        return VariableKind.COVECTOR
    m = _BASE.match(name)
    if m:
        i = int(m.group(1))
        if i < 1 or i > n:
            raise ParseError(f"base index out of range in {name!r} (n={n})", 0)
        return VariableKind.BASE
    if name == "u":
        return VariableKind.UNKNOWN
    return VariableKind.PARAMETER


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str | None:
        self.skip_ws()
        if self.pos >= len(self.text):
            return None
        return self.text[self.pos]

    def take_int(self) -> int | None:
        self.skip_ws()
        m = _INT.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return int(m.group())

    def take_ident(self) -> str | None:
        self.skip_ws()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group()

    def take_char(self, chars: str) -> str | None:
        c = self.peek()
        if c is not None and c in chars:
            self.pos += 1
            return c
        return None


class Parser:
    def __init__(self, text: str, n: int):
        if n < 2:
            raise ValueError("dimension n must be at least 2")
        self.toks = _Tokens(text)
        self.n = n

    def parse(self) -> Node:
        node = self._expr()
        self.toks.skip_ws()
        if self.toks.pos != len(self.toks.text):
            raise ParseError("unexpected trailing input", self.toks.pos)
        return node

    def _expr(self) -> Node:
        node = self._term()
        while True:
            op = self.toks.take_char("+-")
            if op is None:
                return node
            node = BinOp(op, node, self._term())

    def _term(self) -> Node:
        node = self._factor()
        while True:
            op = self.toks.take_char("*/")
            if op is None:
                return node
            node = BinOp(op, node, self._factor())

    def _factor(self) -> Node:
        if self.toks.take_char("-"):
            return Neg(self._factor())
        node = self._atom()
        if self.toks.take_char("^"):
            pos = self.toks.pos
            k = self.toks.take_int()
            if k is None:
                raise ParseError("exponent must be a nonnegative integer literal", pos)
            return Pow(node, k)
        return node

    def _atom(self) -> Node:
        pos = self.toks.pos
        if self.toks.take_char("("):
            node = self._expr()
            if not self.toks.take_char(")"):
                raise ParseError("expected ')'", self.toks.pos)
            return node
        k = self.toks.take_int()
        if k is not None:
            return Const(Fraction(k))
        name = self.toks.take_ident()
        if name is not None:
            try:
                kind = classify_name(name, self.n)
            except ParseError as exc:
                raise ParseError(exc.message, pos) from None
            return Var(name, kind)
        raise ParseError("expected a number, identifier or '('", self.toks.pos)


def parse(text: str, n: int) -> Node:
    """Parse `text` into an AST, validating indices against dimension n."""
    return Parser(text, n).parse()


def lower(ast: Node) -> RationalFunction:
    """Lower an AST to an exact, reduced RationalFunction."""
    if isinstance(ast, Const):
        return RationalFunction.const(ast.value)
    if isinstance(ast, Var):
        return RationalFunction.var(ast.name)
    if isinstance(ast, Neg):
        return -lower(ast.child)
    if isinstance(ast, Pow):
        return lower(ast.base) ** ast.exponent
    if isinstance(ast, BinOp):
        a, b = lower(ast.left), lower(ast.right)
        if ast.op == "+":
            return a + b
        if ast.op == "-":
            return a - b
        if ast.op == "*":
            return a * b
        if b.is_zero():
            raise ZeroDivisionError("division by the identically zero expression")
        return a / b
    raise TypeError(f"unknown AST node {ast!r}")


def parse_expression(text: str, n: int) -> RationalFunction:
    return lower(parse(text, n))


def format_rf(f: RationalFunction | MultiPoly) -> str:
    """Render a value in a form `parse` accepts (round-trip safe)."""
    if isinstance(f, MultiPoly):
        return _format_poly(f)
    if f.is_poly():
        return _format_poly(f.as_poly())
    return f"({_format_poly(f.num)}) / ({_format_poly(f.den)})"


def _format_poly(p: MultiPoly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for e, c in p.sorted_terms():
        factors = []
        if c.denominator == 1:
            coef = str(abs(c.numerator)) if abs(c) != 1 else ""
        else:
            coef = f"{abs(c.numerator)}/{c.denominator}"
        if coef:
            factors.append(coef)
        for v, k in zip(p.vars, e):
            if k == 1:
                factors.append(v)
            elif k > 1:
                factors.append(f"{v}^{k}")
        body = "*".join(factors) if factors else "1"
        parts.append(("-" if c < 0 else "+", body))
    sign, body = parts[0]
    out = body if sign == "+" else f"-{body}"
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def point_from_string(s: str) -> dict[str, Fraction]:
    """Parse "p11=1/2,p12=-3" into a rational point binding."""
    out: dict[str, Fraction] = {}
    if not s.strip():
        return out
    for piece in s.split(","):
        if "=" not in piece:
            raise ParseError(f"expected name=value in point component {piece!r}", 0)
        name, value = piece.split("=", 1)
        out[name.strip()] = Fraction(value.strip())
    return out
