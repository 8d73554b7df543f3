"""Tiny arithmetic expression language for scenario files.

Grammar (plant drifts, input gains and the leader signal are all written
in it):

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' integer)?          # integer exponent only
    atom     := NUMBER | VARIABLE | FUNCTION '(' expr ')' | '(' expr ')'

Variables are x1..x9 and t; functions are sin, cos, tanh, exp, abs, sqrt.
Parse errors carry the byte offset and what was expected.  An expression is
an immutable tree; `evaluate` walks it with an environment, `compile_fn`
bakes it into a fast positional callable, and `pretty` prints a canonical
text whose reparse yields a structurally identical tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Union

FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tanh": math.tanh,
    "exp": math.exp,
    "abs": abs,
    "sqrt": math.sqrt,
}

VARIABLES = frozenset(f"x{i}" for i in range(1, 10)) | {"t"}


class ExpressionError(ValueError):
    """Parse or evaluation failure; `offset` is the byte position."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"


Expression = Union[Num, Var, Neg, BinOp, Pow, Call]

_TOKEN_OPS = set("+-*/^(),")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _TOKEN_OPS:
            tokens.append(("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            try:
                float(lit)
            except ValueError:
                raise ExpressionError(f"malformed number {lit!r}", i) from None
            tokens.append(("num", lit, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ExpressionError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


def _display(val: str) -> str:
    return repr(val) if val else "end of input"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val, off = self.peek()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r}, found {_display(val)}", off)
        self.take()

    def parse(self) -> Expression:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected trailing {val!r}", off)
        return node

    def expr(self) -> Expression:
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                node = BinOp(val, node, self.term())
            else:
                return node

    def term(self) -> Expression:
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                node = BinOp(val, node, self.unary())
            else:
                return node

    def unary(self) -> Expression:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        node = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            node = Pow(node, self.exponent())
        return node

    def exponent(self) -> int:
        sign = 1
        kind, val, off = self.peek()
        if kind == "op" and val == "-":
            self.take()
            sign = -1
            kind, val, off = self.peek()
        if kind != "num":
            raise ExpressionError(
                f"expected integer exponent, found {_display(val)}", off
            )
        self.take()
        value = float(val)
        if value != int(value):
            raise ExpressionError(f"exponent must be an integer, got {val}", off)
        return sign * int(value)

    def atom(self) -> Expression:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if val in FUNCTIONS:
                self.expect_op("(")
                args = [self.expr()]
                while True:
                    k, v, o = self.peek()
                    if k == "op" and v == ",":
                        self.take()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != 1:
                    raise ExpressionError(
                        f"{val} expects 1 argument, got {len(args)}", off
                    )
                return Call(val, args[0])
            if val in VARIABLES:
                return Var(val)
            raise ExpressionError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError(f"expected expression, found {_display(val)}", off)


def parse_expression(text: str) -> Expression:
    """Parse text into an expression tree; raises ExpressionError with offset."""
    return _Parser(text).parse()


def evaluate(expr: Expression, env: Mapping[str, float]) -> float:
    """Recursive evaluation against a variable environment."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return float(env[expr.name])
        except KeyError:
            raise ExpressionError(f"variable {expr.name!r} has no value") from None
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, env)
    if isinstance(expr, BinOp):
        a = evaluate(expr.left, env)
        b = evaluate(expr.right, env)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        return a / b
    if isinstance(expr, Pow):
        return evaluate(expr.base, env) ** expr.exponent
    if isinstance(expr, Call):
        return FUNCTIONS[expr.func](evaluate(expr.arg, env))
    raise TypeError(f"not an expression node: {expr!r}")


def variables(expr: Expression) -> frozenset[str]:
    """All variable names the expression reads."""
    if isinstance(expr, (Num,)):
        return frozenset()
    if isinstance(expr, Var):
        return frozenset((expr.name,))
    if isinstance(expr, Neg):
        return variables(expr.operand)
    if isinstance(expr, BinOp):
        return variables(expr.left) | variables(expr.right)
    if isinstance(expr, Pow):
        return variables(expr.base)
    if isinstance(expr, Call):
        return variables(expr.arg)
    raise TypeError(f"not an expression node: {expr!r}")


# Pretty printing: operator precedence levels used to decide parentheses.
_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(expr: Expression) -> int:
    if isinstance(expr, BinOp):
        return _PREC_ADD if expr.op in "+-" else _PREC_MUL
    if isinstance(expr, Neg):
        return _PREC_UNARY
    if isinstance(expr, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _fmt(expr: Expression, min_prec: int) -> str:
    p = _prec(expr)
    if isinstance(expr, Num):
        text = repr(expr.value)
    elif isinstance(expr, Var):
        text = expr.name
    elif isinstance(expr, Neg):
        text = f"-{_fmt(expr.operand, _PREC_UNARY)}"
    elif isinstance(expr, BinOp):
        # right operand one level tighter so left-associative reparse
        # rebuilds the identical tree
        text = f"{_fmt(expr.left, p)} {expr.op} {_fmt(expr.right, p + 1)}"
    elif isinstance(expr, Pow):
        text = f"{_fmt(expr.base, _PREC_ATOM)}^{expr.exponent}"
    elif isinstance(expr, Call):
        text = f"{expr.func}({_fmt(expr.arg, 0)})"
    else:
        raise TypeError(f"not an expression node: {expr!r}")
    return f"({text})" if p < min_prec else text


def pretty(expr: Expression) -> str:
    """Canonical text form; parse(pretty(e)) is structurally equal to e."""
    return _fmt(expr, 0)


def _codegen(expr: Expression) -> str:
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        if expr.name == "t":
            return "t"
        return f"x[{int(expr.name[1:]) - 1}]"
    if isinstance(expr, Neg):
        return f"(-{_codegen(expr.operand)})"
    if isinstance(expr, BinOp):
        return f"({_codegen(expr.left)} {expr.op} {_codegen(expr.right)})"
    if isinstance(expr, Pow):
        return f"({_codegen(expr.base)})**{expr.exponent}"
    if isinstance(expr, Call):
        return f"{expr.func}({_codegen(expr.arg)})"
    raise TypeError(f"not an expression node: {expr!r}")


@lru_cache(maxsize=None)
def compile_fn(expr: Expression) -> Callable[..., float]:
    """Bake a tree into `f(x, t)` with x indexed positionally (x1 -> x[0]).

    Orders of magnitude faster than `evaluate` in integration loops;
    semantics are identical.
    """
    ns = dict(FUNCTIONS)
    ns["__builtins__"] = {}
    return eval(f"lambda x, t=0.0: {_codegen(expr)}", ns)  # noqa: S307 - own codegen
