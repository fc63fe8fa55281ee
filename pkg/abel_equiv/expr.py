"""
Coefficient expressions: a small grammar over the single variable x.

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' integer)?
    atom    := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'

'^' binds tighter than unary minus and is right-associative; its exponent
must be an integer literal, optionally signed or parenthesized.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Iterator, List, Optional, Union

from abel_equiv.errors import (
    EvalDomainError,
    ExpressionSyntaxError,
    JetError,
    NonIntegerExponent,
)
from abel_equiv.jet import ELEMENTARY, Jet

LOG = logging.getLogger("expr")

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "abs")
NAMED_CONSTANTS = {"pi": math.pi, "e": math.e}

# Binding power and associativity of binary operators
BINARY_OPERATORS = {
    "+": (1, "left"),
    "-": (1, "left"),
    "*": (2, "left"),
    "/": (2, "left"),
    "^": (4, "right"),
}
UNARY_PRECEDENCE = 3
ATOM_PRECEDENCE = 5

_TOKEN_RE = re.compile(
    r"(?P<space>\s+)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)

_PRIMARY = frozenset(["number", "x", "pi", "e", "(", "-", *FUNCTIONS])
_AFTER_OPERAND = frozenset(["+", "-", "*", "/", "^", ")", "end of input"])


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError(f"literal must be finite and non-negative: {self.value}")


@dataclass(frozen=True)
class NamedConstant:
    name: str


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: Expression


@dataclass(frozen=True)
class Binary:
    op: str
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Pow:
    base: Expression
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    argument: Expression


Expression = Union[Const, NamedConstant, Var, Neg, Binary, Pow, Call]

X = Var()


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = list(self._tokenize())
        self.pos = 0

    def _byte_offset(self, index: int) -> int:
        return len(self.text[:index].encode("utf-8"))

    def _error(self, message: str, index: int, expected=()) -> ExpressionSyntaxError:
        return ExpressionSyntaxError(message, self._byte_offset(index), expected)

    def _tokenize(self) -> Iterator[Token]:
        index = 0
        while index < len(self.text):
            match = _TOKEN_RE.match(self.text, index)
            if match is None:
                raise self._error(
                    f"unexpected character {self.text[index]!r}", index, _PRIMARY
                )
            kind = match.lastgroup
            if kind != "space":
                yield Token(kind, match.group(), index)
            index = match.end()
        yield Token("end", "", len(self.text))

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.peek()
        if token.text != text or token.kind == "end":
            raise self._error(f"unexpected {_describe(token)}", token.offset, {text})
        return self.advance()

    def parse(self) -> Expression:
        tree = self.binary(0)
        token = self.peek()
        if token.kind != "end":
            raise self._error(
                f"unexpected {_describe(token)}", token.offset, _AFTER_OPERAND
            )
        return tree

    def binary(self, min_prec: int) -> Expression:
        lhs = self.unary()
        while True:
            token = self.peek()
            if token.kind != "op" or token.text not in BINARY_OPERATORS:
                return lhs
            prec, assoc = BINARY_OPERATORS[token.text]
            if prec < min_prec:
                return lhs
            self.advance()
            next_prec = prec + 1 if assoc == "left" else prec
            if token.text == "^":
                exponent_token = self.peek()
                rhs = self.binary(next_prec)
                lhs = Pow(lhs, _integer_exponent(rhs, self, exponent_token))
            else:
                lhs = Binary(token.text, lhs, self.binary(next_prec))

    def unary(self) -> Expression:
        token = self.peek()
        if token.kind == "op" and token.text == "-":
            self.advance()
            return Neg(self.binary(UNARY_PRECEDENCE))
        return self.atom()

    def atom(self) -> Expression:
        token = self.advance()
        if token.kind == "number":
            value = float(token.text)
            if not math.isfinite(value):
                raise self._error("number out of range", token.offset)
            return Const(value)
        if token.kind == "name":
            if token.text == "x":
                return X
            if token.text in NAMED_CONSTANTS:
                return NamedConstant(token.text)
            if token.text in FUNCTIONS:
                self.expect("(")
                argument = self.binary(0)
                self.expect(")")
                return Call(token.text, argument)
            raise self._error(f"unknown name '{token.text}'", token.offset, _PRIMARY)
        if token.kind == "op" and token.text == "(":
            inner = self.binary(0)
            self.expect(")")
            return inner
        raise self._error(f"unexpected {_describe(token)}", token.offset, _PRIMARY)


def _describe(token: Token) -> str:
    return "end of input" if token.kind == "end" else f"'{token.text}'"


def _integer_exponent(node: Expression, parser: _Parser, token: Token) -> int:
    sign = 1
    if isinstance(node, Neg):
        sign, node = -1, node.operand
    if isinstance(node, Const) and node.value.is_integer():
        return sign * int(node.value)
    raise NonIntegerExponent(
        "exponent must be an integer literal",
        parser._byte_offset(token.offset),
        {"integer"},
    )


def parse(text: str) -> Expression:
    return _Parser(text).parse()


def precedence(e: Expression) -> int:
    if isinstance(e, Binary):
        return BINARY_OPERATORS[e.op][0]
    if isinstance(e, Neg):
        return UNARY_PRECEDENCE
    if isinstance(e, Pow):
        return BINARY_OPERATORS["^"][0]
    return ATOM_PRECEDENCE


def _render_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def render(e: Expression) -> str:
    """
    Text with the fewest parentheses that parses back to the same tree
    """
    if isinstance(e, Const):
        return _render_number(e.value)
    if isinstance(e, NamedConstant):
        return e.name
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Call):
        return f"{e.name}({render(e.argument)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, precedence(e.operand) < UNARY_PRECEDENCE)
    if isinstance(e, Pow):
        return _wrap(e.base, precedence(e.base) < ATOM_PRECEDENCE) + f"^{e.exponent}"
    prec = precedence(e)
    left = _wrap(e.left, precedence(e.left) < prec)
    right = _wrap(e.right, precedence(e.right) <= prec)
    return f"{left}{e.op}{right}"


def _wrap(e: Expression, needed: bool) -> str:
    text = render(e)
    return f"({text})" if needed else text


def substitute(e: Expression, inner: Expression) -> Expression:
    """
    Replace every occurrence of x by inner
    """
    if isinstance(e, Var):
        return inner
    if isinstance(e, Neg):
        return Neg(substitute(e.operand, inner))
    if isinstance(e, Binary):
        return Binary(e.op, substitute(e.left, inner), substitute(e.right, inner))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, inner), e.exponent)
    if isinstance(e, Call):
        return Call(e.name, substitute(e.argument, inner))
    return e


def eval_jet(e: Expression, x0: float, order: int) -> Jet:
    if order < 0:
        raise ValueError(f"jet order must be non-negative, got {order}")
    return _eval(e, x0, order)


def _eval(e: Expression, x0: float, order: int) -> Jet:
    if isinstance(e, Const):
        return Jet.constant(e.value, x0, order)
    if isinstance(e, NamedConstant):
        return Jet.constant(NAMED_CONSTANTS[e.name], x0, order)
    if isinstance(e, Var):
        return Jet.identity(x0, order)
    if isinstance(e, Neg):
        return -_eval(e.operand, x0, order)

    try:
        if isinstance(e, Binary):
            left, right = _eval(e.left, x0, order), _eval(e.right, x0, order)
            if e.op == "+":
                return left + right
            if e.op == "-":
                return left - right
            if e.op == "*":
                return left * right
            return left / right
        if isinstance(e, Pow):
            return _eval(e.base, x0, order) ** e.exponent
        return ELEMENTARY[e.name](_eval(e.argument, x0, order))
    except JetError as ex:
        raise EvalDomainError(render(e), str(ex)) from ex


def evaluate(e: Expression, x: float) -> float:
    return eval_jet(e, x, 0).value


# Builders with light constant folding


def literal(e: Expression) -> Optional[float]:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Neg) and isinstance(e.operand, Const):
        return -e.operand.value
    return None


def const(value: float) -> Expression:
    value = float(value)
    if value < 0:
        return Neg(Const(-value))
    return Const(value + 0.0)


def neg(e: Expression) -> Expression:
    value = literal(e)
    if value is not None:
        return const(-value)
    if isinstance(e, Neg):
        return e.operand
    return Neg(e)


def add(a: Expression, b: Expression) -> Expression:
    va, vb = literal(a), literal(b)
    if va is not None and vb is not None:
        return const(va + vb)
    if va == 0:
        return b
    if vb == 0:
        return a
    return Binary("+", a, b)


def sub(a: Expression, b: Expression) -> Expression:
    va, vb = literal(a), literal(b)
    if va is not None and vb is not None:
        return const(va - vb)
    if vb == 0:
        return a
    if va == 0:
        return neg(b)
    return Binary("-", a, b)


def mul(a: Expression, b: Expression) -> Expression:
    va, vb = literal(a), literal(b)
    if va is not None and vb is not None:
        return const(va * vb)
    if va == 0 or vb == 0:
        return const(0.0)
    if va == 1:
        return b
    if vb == 1:
        return a
    return Binary("*", a, b)


def div(a: Expression, b: Expression) -> Expression:
    va, vb = literal(a), literal(b)
    if va is not None and vb is not None and vb != 0:
        return const(va / vb)
    if vb == 1:
        return a
    if va == 0 and vb != 0:
        return const(0.0)
    return Binary("/", a, b)


def power(base: Expression, exponent: int) -> Expression:
    if exponent == 0:
        return const(1.0)
    if exponent == 1:
        return base
    value = literal(base)
    if value is not None and (value != 0 or exponent > 0):
        folded = value**exponent
        if math.isfinite(folded):
            return const(folded)
    return Pow(base, exponent)


def polynomial(coefficients: List[float]) -> Expression:
    """
    sum(coefficients[i] * x^i) with zero terms dropped
    """
    result: Expression = const(0.0)
    for i, c in enumerate(coefficients):
        result = add(result, mul(const(c), power(X, i)))
    return result
