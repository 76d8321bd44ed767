"""Small expression language for entering weight and integrand functions.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

The first coordinate may be written ``t``, ``x`` or ``k``; the second ``s``,
``y`` or ``l``. Evaluation is vectorised over numpy arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

FIRST_VARS = ("t", "x", "k")
SECOND_VARS = ("s", "y", "l")
CONSTANTS = {"pi": np.pi, "e": np.e}
FUNCTIONS = {
    "abs": np.abs,
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
}


class ExpressionError(ValueError):
    """Raised for malformed expressions; ``offset`` is a byte offset into the text."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class EvaluationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Num, Var, Unary, Binary, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionError(f"unexpected character {text[bad]!r}", _byte_offset(text, bad))
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), _byte_offset(text, m.start(kind))))
        pos = m.end()
    tokens.append(("eof", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, offset = self.take()
        if text != value or kind != "op":
            found = "end of input" if kind == "eof" else repr(text)
            raise ExpressionError(f"expected {value!r}, found {found}", offset)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, offset = self.peek()
        if kind != "eof":
            raise ExpressionError(f"unexpected token {text!r}", offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        kind, text, _ = self.peek()
        if kind == "op" and text in ("+", "-"):
            self.take()
            return Unary(text, self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, text, offset = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                nxt = self.peek()
                if nxt[1] != "(":
                    raise ExpressionError(f"function {text!r} requires an argument", nxt[2])
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in FIRST_VARS:
                return Var(text, 0)
            if text in SECOND_VARS:
                return Var(text, 1)
            if text in CONSTANTS:
                return Num(float(CONSTANTS[text]))
            raise ExpressionError(f"unknown identifier {text!r}", offset)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "eof" else repr(text)
        raise ExpressionError(f"expected a value, found {found}", offset)


def parse_ast(text: str) -> Node:
    if not text or not text.strip():
        raise ExpressionError("empty expression", 0)
    return _Parser(text).parse()


def arity(node: Node) -> int:
    """Number of coordinates the expression needs (0 for constants)."""
    if isinstance(node, Num):
        return 0
    if isinstance(node, Var):
        return node.index + 1
    if isinstance(node, Unary):
        return arity(node.operand)
    if isinstance(node, Call):
        return arity(node.arg)
    return max(arity(node.left), arity(node.right))


def eval_ast(node: Node, coords: tuple) -> np.ndarray | float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.index >= len(coords):
            raise EvaluationError(f"variable {node.name!r} has no coordinate on this domain")
        return coords[node.index]
    if isinstance(node, Unary):
        val = eval_ast(node.operand, coords)
        return -val if node.op == "-" else val
    if isinstance(node, Call):
        with np.errstate(all="ignore"):
            return FUNCTIONS[node.name](eval_ast(node.arg, coords))
    left = eval_ast(node.left, coords)
    right = eval_ast(node.right, coords)
    with np.errstate(all="ignore"):
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            return np.true_divide(left, right)
        base = np.asarray(left, dtype=float)
        expo = np.asarray(right, dtype=float)
        if np.any((base < 0) & (expo != np.round(expo))):
            raise EvaluationError("non-integer power of a negative base; wrap the base in abs()")
        return np.power(base, expo)
