"""Scalar functions of one variable ``t``.

Expressions are parsed into a small immutable AST which can be evaluated on
floats or numpy arrays, and differentiated exactly in forward mode.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-" factor | atom ("^" number)?
    atom   := number | "t" | "(" expr ")" | ("exp"|"log"|"sqrt") "(" expr ")"

``-t^2`` parses as ``-(t^2)``. The exponent may carry a leading minus sign
(``t^-1``) but must be a numeric literal.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _defaults

__all__ = [
    "ParseError",
    "DomainError",
    "DomainInterval",
    "ScalarFunction",
    "parse",
    "evaluate",
    "eval_dual",
    "companion",
    "to_text",
]


class ParseError(ValueError):
    """Malformed expression text. ``offset`` is the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class DomainError(ValueError):
    """A function was evaluated outside the set where it is defined."""

    def __init__(self, message: str, point=None):
        super().__init__(message if point is None else f"{message} at t={point!r}")
        self.point = point


@dataclass(frozen=True)
class DomainInterval:
    """Open interval ``(lo, hi)`` with ``lo > 0``; ``hi`` may be ``inf``."""

    lo: float = _defaults.DOMAIN_LO
    hi: float = _defaults.DOMAIN_HI

    def __post_init__(self):
        if not self.lo > 0:
            raise ValueError(f"domain lower bound must be > 0, got {self.lo}")
        if not self.lo < self.hi:
            raise ValueError(f"empty domain ({self.lo}, {self.hi})")

    def contains(self, t) -> bool:
        t = np.asarray(t)
        return bool(np.all((t > self.lo) & (t < self.hi)))

    @classmethod
    def from_text(cls, text: str) -> "DomainInterval":
        """Parse ``"lo:hi"``; ``hi`` may be ``inf``."""
        lo, sep, hi = text.partition(":")
        if not sep:
            raise ValueError(f"expected lo:hi, got {text!r}")
        return cls(float(lo), float(hi))

    def __str__(self):
        return f"{self.lo!r}:{self.hi!r}"


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: float


@dataclass(frozen=True)
class Call:
    name: str  # exp, log or sqrt
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Pow, Call]

_FUNCTIONS = ("exp", "log", "sqrt")


@dataclass(frozen=True)
class ScalarFunction:
    """A parsed expression in ``t``. Immutable; safe to share between workers."""

    ast: Node
    source_text: str

    def __call__(self, t):
        return evaluate(self, t)

    def dual(self, t):
        return eval_dual(self, t)

    def derivative(self, t):
        return eval_dual(self, t)[1]

    def __str__(self):
        return self.source_text


# --------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(text, len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, offset = self.tok
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", offset)
        self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, text, offset = self.tok
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Neg(self.factor())
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> float:
        sign = 1.0
        kind, text, offset = self.tok
        if kind == "op" and text == "-":
            sign = -1.0
            self.advance()
            kind, text, offset = self.tok
        if kind != "number":
            raise ParseError("non-constant exponent: '^' must be followed by a number", offset)
        self.advance()
        return sign * self._number(text, offset)

    @staticmethod
    def _number(text: str, offset: int) -> float:
        value = float(text)
        if not math.isfinite(value):
            raise ParseError(f"numeric literal {text!r} out of range", offset)
        return value

    def atom(self) -> Node:
        kind, text, offset = self.advance()
        if kind == "number":
            return Const(self._number(text, offset))
        if kind == "name":
            if text == "t":
                return Var()
            if text in _FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise ParseError(f"unknown identifier {text!r}", offset)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", offset)


def parse(text: str) -> ScalarFunction:
    """Parse ``text`` into a :class:`ScalarFunction`.

    >>> parse("t/(1+t)")(1.0)
    0.5
    """
    return ScalarFunction(_Parser(text).parse(), text.strip())


def to_text(node: Node) -> str:
    """Fully parenthesized source for ``node``; re-parses to an equal tree."""
    if isinstance(node, ScalarFunction):
        node = node.ast
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)})^{float(node.exponent)!r}"
    if isinstance(node, Call):
        return f"{node.name}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------------
# Evaluation
#
# A single recursive walk computes the value and, optionally, the forward
# derivative. The value is produced by the same expression in both modes so
# evaluate() and eval_dual() agree bit for bit.


def _first_bad(mask, x):
    if np.ndim(x) == 0:
        return float(x)
    idx = np.flatnonzero(np.broadcast_to(mask, np.shape(x)))
    return float(np.ravel(x)[idx[0]]) if idx.size else None


def _walk(node: Node, x, want_der: bool):
    if isinstance(node, Var):
        return x, (np.ones_like(x) if want_der else None)
    if isinstance(node, Const):
        return np.float64(node.value), (np.float64(0.0) if want_der else None)
    if isinstance(node, Neg):
        v, d = _walk(node.arg, x, want_der)
        return -v, (-d if want_der else None)
    if isinstance(node, BinOp):
        a, da = _walk(node.left, x, want_der)
        b, db = _walk(node.right, x, want_der)
        if node.op == "+":
            return a + b, (da + db if want_der else None)
        if node.op == "-":
            return a - b, (da - db if want_der else None)
        if node.op == "*":
            return a * b, (da * b + a * db if want_der else None)
        bad = np.abs(b) < _defaults.DIV_GUARD
        if np.any(bad):
            raise DomainError("division by (near) zero", _first_bad(bad, x))
        v = a / b
        return v, ((da * b - a * db) / (b * b) if want_der else None)
    if isinstance(node, Pow):
        a, da = _walk(node.base, x, want_der)
        p = node.exponent
        if not float(p).is_integer():
            bad = a < 0
            if np.any(bad):
                raise DomainError(f"negative base to non-integer power {p!r}", _first_bad(bad, x))
        if p < 0:
            bad = a == 0
            if np.any(bad):
                raise DomainError(f"zero to negative power {p!r}", _first_bad(bad, x))
        v = np.power(a, p)
        if not want_der:
            return v, None
        if p == 0:
            return v, np.zeros_like(v)
        if p == 1:
            return v, da
        return v, p * np.power(a, p - 1) * da
    if isinstance(node, Call):
        a, da = _walk(node.arg, x, want_der)
        if node.name == "exp":
            v = np.exp(a)
            return v, (v * da if want_der else None)
        if node.name == "log":
            bad = ~(a > 0)
            if np.any(bad):
                raise DomainError("log of non-positive value", _first_bad(bad, x))
            return np.log(a), (da / a if want_der else None)
        if node.name == "sqrt":
            bad = ~(a >= 0)
            if np.any(bad):
                raise DomainError("sqrt of negative value", _first_bad(bad, x))
            v = np.sqrt(a)
            return v, (da / (2 * v) if want_der else None)
    raise TypeError(f"not an expression node: {node!r}")


def _check_finite(v, x, what):
    bad = ~np.isfinite(v)
    if np.any(bad):
        raise DomainError(f"non-finite {what}", _first_bad(bad, x))


def _prepare(fn, t, domain):
    x = np.asarray(t, dtype=np.float64)
    if domain is not None:
        bad = ~((x > domain.lo) & (x < domain.hi))
        if np.any(bad):
            raise DomainError(f"outside domain ({domain.lo}, {domain.hi})", _first_bad(bad, x))
    return x


def _out(v, t):
    v = np.broadcast_to(v, np.shape(t)) if np.ndim(t) else v
    return float(v) if np.ndim(t) == 0 else np.array(v, dtype=np.float64)


def evaluate(fn: ScalarFunction, t, domain: DomainInterval | None = None):
    """Evaluate ``fn`` at ``t`` (float or array).

    Raises :class:`DomainError` if ``t`` falls outside ``domain`` (when given)
    or any sub-expression leaves its domain of definition.
    """
    x = _prepare(fn, t, domain)
    with np.errstate(all="ignore"):
        v, _ = _walk(fn.ast, x, False)
    _check_finite(v, x, "value")
    return _out(v, t)


def eval_dual(fn: ScalarFunction, t, domain: DomainInterval | None = None):
    """Return ``(value, derivative)`` by forward-mode dual arithmetic."""
    x = _prepare(fn, t, domain)
    with np.errstate(all="ignore"):
        v, d = _walk(fn.ast, x, True)
    _check_finite(v, x, "value")
    _check_finite(d, x, "derivative")
    return _out(v, t), _out(d, t)


def companion(fn_f: ScalarFunction) -> ScalarFunction:
    """The function ``t / f(t)``.

    Applying it twice gives back ``f`` pointwise, so the same call recovers
    ``f`` from ``g``.
    """
    return ScalarFunction(BinOp("/", Var(), fn_f.ast), f"t/({fn_f.source_text})")
