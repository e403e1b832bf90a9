"""Tiny arithmetic expressions over x1..xn with symbolic differentiation.

Grammar: ``+ - * / ^``, unary minus, parentheses, the functions exp/sin/cos,
numeric literals, and variables x1..xn.  ``^`` is right-associative and can
be differentiated only for constant exponents (the grammar has no log).
Evaluation is numpy-vectorised: variables index the last axis of the input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np


class ExpressionError(ValueError):
    def __init__(self, msg: str, line: int = 1, col: int = 0):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line = line
        self.col = col


class Node:
    __slots__ = ()

    def __add__(self, other):
        return _add(self, _coerce(other))

    def __radd__(self, other):
        return _add(_coerce(other), self)

    def __sub__(self, other):
        return _sub(self, _coerce(other))

    def __mul__(self, other):
        return _mul(self, _coerce(other))

    def __rmul__(self, other):
        return _mul(_coerce(other), self)


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    index: int  # zero-based; prints as x{index+1}


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node


_FUNCS = {"exp": np.exp, "sin": np.sin, "cos": np.cos}


def _coerce(v):
    return v if isinstance(v, Node) else Num(float(v))


def _is_num(node, value=None):
    return isinstance(node, Num) and (value is None or node.value == value)


def _add(a, b):
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return BinOp("+", a, b)


def _sub(a, b):
    if _is_num(a) and _is_num(b):
        return Num(a.value - b.value)
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return Neg(b)
    return BinOp("-", a, b)


def _mul(a, b):
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return BinOp("*", a, b)


def _div(a, b):
    if _is_num(a, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    return BinOp("/", a, b)


_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?|([A-Za-z_]\w*)|(\S))")


class _Parser:
    def __init__(self, text: str, nvars: int, line: int = 1):
        self.text = text
        self.nvars = nvars
        self.line = line
        self.pos = 0
        self.tokens = []
        self._tokenize()
        self.i = 0

    def _tokenize(self):
        pos = 0
        number = re.compile(r"(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")
        name = re.compile(r"[A-Za-z_]\w*")
        while pos < len(self.text):
            ch = self.text[pos]
            if ch.isspace():
                pos += 1
                continue
            m = number.match(self.text, pos)
            if m:
                self.tokens.append(("num", float(m.group(0)), pos))
                pos = m.end()
                continue
            m = name.match(self.text, pos)
            if m:
                self.tokens.append(("name", m.group(0), pos))
                pos = m.end()
                continue
            if ch in "+-*/^()":
                self.tokens.append((ch, ch, pos))
                pos += 1
                continue
            raise ExpressionError(f"unexpected character {ch!r}", self.line, pos)
        self.tokens.append(("end", None, len(self.text)))

    def _peek(self):
        return self.tokens[self.i]

    def _next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _expect(self, kind):
        tok = self._next()
        if tok[0] != kind:
            raise ExpressionError(f"expected {kind!r}", self.line, tok[2])
        return tok

    def parse(self) -> Node:
        node = self.expr()
        tok = self._peek()
        if tok[0] != "end":
            raise ExpressionError(f"trailing input {tok[1]!r}", self.line, tok[2])
        return node

    def expr(self) -> Node:
        node = self.term()
        while self._peek()[0] in ("+", "-"):
            op = self._next()[0]
            rhs = self.term()
            node = _add(node, rhs) if op == "+" else _sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self._peek()[0] in ("*", "/"):
            op = self._next()[0]
            rhs = self.factor()
            node = _mul(node, rhs) if op == "*" else _div(node, rhs)
        return node

    def factor(self) -> Node:
        tok = self._peek()
        if tok[0] == "-":
            self._next()
            arg = self.factor()
            return Num(-arg.value) if isinstance(arg, Num) else Neg(arg)
        if tok[0] == "+":
            self._next()
            return self.factor()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self._peek()[0] == "^":
            self._next()
            exponent = self.factor()
            return BinOp("^", base, exponent)
        return base

    def atom(self) -> Node:
        tok = self._next()
        if tok[0] == "num":
            return Num(tok[1])
        if tok[0] == "(":
            node = self.expr()
            closing = self._peek()
            if closing[0] != ")":
                raise ExpressionError("unclosed parenthesis", self.line, tok[2])
            self._next()
            return node
        if tok[0] == "name":
            name = tok[1]
            if name in _FUNCS:
                opening = self._peek()
                if opening[0] != "(":
                    raise ExpressionError(f"{name} requires parentheses", self.line, tok[2])
                self._next()
                arg = self.expr()
                closing = self._peek()
                if closing[0] != ")":
                    raise ExpressionError("unclosed parenthesis", self.line, opening[2])
                self._next()
                return Call(name, arg)
            m = re.fullmatch(r"x(\d+)", name)
            if m:
                idx = int(m.group(1))
                if not 1 <= idx <= self.nvars:
                    raise ExpressionError(f"variable {name} out of range (n={self.nvars})", self.line, tok[2])
                return Var(idx - 1)
            raise ExpressionError(f"unknown name {name!r}", self.line, tok[2])
        raise ExpressionError("expected a value", self.line, tok[2])


def parse_expression(text: str, nvars: int, line: int = 1) -> Node:
    return _Parser(text, nvars, line).parse()


def evaluate(node: Node, x) -> np.ndarray:
    """Evaluate at points x of shape (..., n); broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    if isinstance(node, Num):
        return np.broadcast_to(np.float64(node.value), x.shape[:-1]).copy()
    if isinstance(node, Var):
        return x[..., node.index].copy()
    if isinstance(node, Neg):
        return -evaluate(node.arg, x)
    if isinstance(node, Call):
        return _FUNCS[node.func](evaluate(node.arg, x))
    l = evaluate(node.left, x)
    r = evaluate(node.right, x)
    if node.op == "+":
        return l + r
    if node.op == "-":
        return l - r
    if node.op == "*":
        return l * r
    if node.op == "/":
        return l / r
    return l ** r


def differentiate(node: Node, var: int) -> Node:
    """Symbolic partial derivative with constant folding."""
    if isinstance(node, Num):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0 if node.index == var else 0.0)
    if isinstance(node, Neg):
        d = differentiate(node.arg, var)
        return Num(-d.value) if isinstance(d, Num) else Neg(d)
    if isinstance(node, Call):
        d = differentiate(node.arg, var)
        if node.func == "exp":
            outer = Call("exp", node.arg)
        elif node.func == "sin":
            outer = Call("cos", node.arg)
        else:  # cos
            outer = Neg(Call("sin", node.arg))
        return _mul(d, outer)
    if node.op == "+":
        return _add(differentiate(node.left, var), differentiate(node.right, var))
    if node.op == "-":
        return _sub(differentiate(node.left, var), differentiate(node.right, var))
    if node.op == "*":
        return _add(
            _mul(differentiate(node.left, var), node.right),
            _mul(node.left, differentiate(node.right, var)),
        )
    if node.op == "/":
        num = _sub(
            _mul(differentiate(node.left, var), node.right),
            _mul(node.left, differentiate(node.right, var)),
        )
        return _div(num, BinOp("*", node.right, node.right))
    if node.op == "^":
        if not isinstance(node.right, Num):
            raise ExpressionError("can only differentiate constant exponents")
        k = node.right.value
        return _mul(
            _mul(Num(k), BinOp("^", node.left, Num(k - 1.0))),
            differentiate(node.left, var),
        )
    raise AssertionError(node)


def to_text(node: Node) -> str:
    """Canonical parseable rendering (fully parenthesised compound terms)."""
    if isinstance(node, Num):
        # negative literals need parentheses so ^ cannot rebind on re-parse
        return f"({node.value!r})" if np.copysign(1.0, node.value) < 0 else repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
