"""Small expression language for user-defined torus maps.

Grammar (whitespace ignored)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

``^`` is right associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)``. Names are the variables ``x`` and ``y``, the constant ``pi``,
user parameters, and the functions ``sin``, ``cos`` and ``exp``.

Trees evaluate on numpy arrays and can be differentiated symbolically.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArityError,
    EvaluationFault,
    ExprSyntaxError,
    UnknownIdentifierError,
    UnsupportedOperationError,
)

VARIABLES = ("x", "y")
CONSTANTS = {"pi": math.pi}
FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_ARITY = {"sin": 1, "cos": 1, "exp": 1}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


# --------------------------------------------------------------------------
# tree


@dataclass(frozen=True)
class Node:
    pos: int

    def depends_on_vars(self) -> bool:
        return any(c.depends_on_vars() for c in self.children())

    def children(self):
        return ()


@dataclass(frozen=True)
class Const(Node):
    value: float
    name: str | None = None

    def __str__(self):
        if self.name is not None:
            return self.name
        return repr(self.value)


@dataclass(frozen=True)
class Var(Node):
    name: str

    def depends_on_vars(self):
        return True

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def children(self):
        return (self.arg,)

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node

    def children(self):
        return (self.arg,)

    def __str__(self):
        return f"{self.func}({self.arg})"


# --------------------------------------------------------------------------
# parser


def _tokenize(source):
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        if source[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(source, i)
        if m is None or m.end() == i:
            raise ExprSyntaxError(f"unexpected character {source[i]!r}", i, source)
        kind = m.lastgroup
        text = m.group(kind)
        tokens.append((kind, text, m.start(kind)))
        i = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, source, params):
        self.source = source
        self.params = params
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, pos = self.peek()
        if value != text or kind == "eof":
            found = "end of input" if kind == "eof" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", pos, self.source)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "eof":
            raise ExprSyntaxError(f"unexpected {value!r}", pos, self.source)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.advance()
            node = BinOp(pos, op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.advance()
            node = BinOp(pos, op, node, self.unary())
        return node

    def unary(self):
        kind, value, pos = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(pos, self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, value, pos = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            return BinOp(pos, "^", base, self.unary())
        return base

    def atom(self):
        kind, value, pos = self.advance()
        if kind == "num":
            return Const(pos, float(value))
        if kind == "name":
            if value in FUNCTIONS:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != _ARITY[value]:
                    raise ArityError(
                        f"{value} takes {_ARITY[value]} argument(s), got {len(args)}",
                        pos,
                        self.source,
                    )
                return Call(pos, value, args[0])
            if value in VARIABLES:
                return Var(pos, value)
            if value in self.params:
                return Const(pos, float(self.params[value]), name=value)
            if value in CONSTANTS:
                return Const(pos, CONSTANTS[value], name=value)
            raise UnknownIdentifierError(f"unknown identifier {value!r}", pos, self.source)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "eof" else repr(value)
        raise ExprSyntaxError(f"unexpected {found}", pos, self.source)


def parse(source: str, params=None) -> Node:
    """Parse ``source`` into an expression tree.

    Parameter names are bound to their values at parse time; they shadow
    ``pi`` but not ``x``/``y`` or function names.
    """
    params = dict(params or {})
    for name in params:
        if name in VARIABLES or name in FUNCTIONS:
            raise UnknownIdentifierError(f"parameter name {name!r} is reserved", None, source)
    return _Parser(source, params).parse()


# --------------------------------------------------------------------------
# evaluation


def _apply(node, env):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_apply(node.arg, env)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_apply(node.arg, env))
    left = _apply(node.left, env)
    right = _apply(node.right, env)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return np.divide(left, right)
    return np.power(left, right)


def _locate_fault(node, env):
    """Return the innermost node producing a non-finite value from finite inputs."""
    for child in node.children():
        hit = _locate_fault(child, env)
        if hit is not None:
            return hit
    with np.errstate(all="ignore"):
        value = np.asarray(_apply(node, env), dtype=float)
    if not np.all(np.isfinite(value)):
        return node
    return None


def evaluate(node: Node, x, y, source: str | None = None):
    """Evaluate ``node`` at ``(x, y)`` (scalars or broadcastable arrays).

    Raises EvaluationFault when any result is non-finite, naming the
    offending sub-expression and the first bad point.
    """
    env = {"x": x, "y": y}
    with np.errstate(all="ignore"):
        value = np.asarray(_apply(node, env), dtype=float)
    value = np.broadcast_to(value, np.broadcast(np.asarray(x), np.asarray(y)).shape)
    if np.all(np.isfinite(value)):
        return value
    bad = _locate_fault(node, env) or node
    xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    idx = np.flatnonzero(~np.isfinite(value.ravel()))[0]
    where = f"'{bad}' (offset {bad.pos}" + (f" of {source!r})" if source else ")")
    raise EvaluationFault(
        "non-finite value", point=(float(xb.ravel()[idx]), float(yb.ravel()[idx])), location=where
    )


# --------------------------------------------------------------------------
# symbolic differentiation


def _is(node, value):
    return isinstance(node, Const) and node.value == value


def _add(a, b, pos):
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(pos, a.value + b.value)
    return BinOp(pos, "+", a, b)


def _sub(a, b, pos):
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return _neg(b, pos)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(pos, a.value - b.value)
    return BinOp(pos, "-", a, b)


def _mul(a, b, pos):
    if _is(a, 0.0) or _is(b, 0.0):
        return Const(pos, 0.0)
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(pos, a.value * b.value)
    return BinOp(pos, "*", a, b)


def _div(a, b, pos):
    if _is(a, 0.0):
        return Const(pos, 0.0)
    if _is(b, 1.0):
        return a
    return BinOp(pos, "/", a, b)


def _neg(a, pos):
    if isinstance(a, Const):
        return Const(pos, -a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(pos, a)


def derivative(node: Node, var: str) -> Node:
    """Symbolic partial derivative of ``node`` with respect to ``var``."""
    p = node.pos
    if isinstance(node, Const):
        return Const(p, 0.0)
    if isinstance(node, Var):
        return Const(p, 1.0 if node.name == var else 0.0)
    if isinstance(node, Neg):
        return _neg(derivative(node.arg, var), p)
    if isinstance(node, Call):
        du = derivative(node.arg, var)
        if node.func == "sin":
            outer = Call(p, "cos", node.arg)
        elif node.func == "cos":
            outer = Neg(p, Call(p, "sin", node.arg))
        else:
            outer = node
        return _mul(outer, du, p)
    u, v = node.left, node.right
    if node.op in "+-":
        du, dv = derivative(u, var), derivative(v, var)
        return _add(du, dv, p) if node.op == "+" else _sub(du, dv, p)
    if node.op == "*":
        return _add(_mul(derivative(u, var), v, p), _mul(u, derivative(v, var), p), p)
    if node.op == "/":
        num = _sub(_mul(derivative(u, var), v, p), _mul(u, derivative(v, var), p), p)
        return _div(num, BinOp(p, "^", v, Const(p, 2.0)), p)
    # power: only constant exponents are supported
    if v.depends_on_vars():
        raise UnsupportedOperationError(
            "cannot differentiate a power with a variable exponent", v.pos
        )
    if _is(v, 0.0):
        return Const(p, 0.0)
    reduced = _sub(v, Const(p, 1.0), p)
    return _mul(_mul(v, BinOp(p, "^", u, reduced), p), derivative(u, var), p)
