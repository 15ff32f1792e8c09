"""Arithmetic expression trees, exact rational evaluation, and the
calculator-call string format.

Calculator-call grammar (stable, documented):

    call  := int | "(" call op call ")"
    op    := "+" | "-" | "*" | "/"
    int   := [0-9]+

Every operator node is bracketed, so a call string parses back to exactly
one tree: ``(2+(4*8))`` is A+(B*C), ``((2+4)*8)`` is (A+B)*C.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class Op(enum.Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"

    @property
    def symbol(self) -> str:
        return self.value

    @property
    def key(self) -> str:
        return self.name.lower()

    @classmethod
    def from_key(cls, key: str) -> "Op":
        return cls[key.upper()]


OPS: tuple[Op, ...] = (Op.ADD, Op.SUB, Op.MUL, Op.DIV)
_SYMBOL_TO_OP = {op.value: op for op in OPS}


@dataclass(frozen=True)
class Leaf:
    value: int


@dataclass(frozen=True)
class Node:
    op: Op
    left: "ArithExpr"
    right: "ArithExpr"


ArithExpr = Union[Leaf, Node]


class EvaluationError(ArithmeticError):
    """Raised on division by zero; names the offending subtree."""


class CalcParseError(ValueError):
    """Raised on a malformed calculator-call string."""


def evaluate(expr: ArithExpr) -> Fraction:
    """Evaluate a tree to an exact rational; no overflow at any operand size."""
    if isinstance(expr, Leaf):
        return Fraction(expr.value)
    left = evaluate(expr.left)
    right = evaluate(expr.right)
    if expr.op is Op.ADD:
        return left + right
    if expr.op is Op.SUB:
        return left - right
    if expr.op is Op.MUL:
        return left * right
    if right == 0:
        raise EvaluationError(f"division by zero in {to_calculator_call(expr)}")
    return left / right


def to_calculator_call(expr: ArithExpr) -> str:
    """Serialize a tree as a fully parenthesized infix string."""
    if isinstance(expr, Leaf):
        return str(expr.value)
    return f"({to_calculator_call(expr.left)}{expr.op.symbol}{to_calculator_call(expr.right)})"


def parse_calculator_call(s: str) -> ArithExpr:
    """Parse the calculator-call grammar back to a tree."""
    text = s.strip()
    expr, pos = _parse_call(text, 0)
    if pos != len(text):
        raise CalcParseError(f"trailing input at {pos} in {s!r}")
    return expr


def _parse_call(text: str, pos: int) -> tuple[ArithExpr, int]:
    if pos >= len(text):
        raise CalcParseError(f"unexpected end of input in {text!r}")
    ch = text[pos]
    if ch.isdigit():
        end = pos
        while end < len(text) and text[end].isdigit():
            end += 1
        return Leaf(int(text[pos:end])), end
    if ch != "(":
        raise CalcParseError(f"expected digit or '(' at {pos} in {text!r}")
    left, pos = _parse_call(text, pos + 1)
    if pos >= len(text) or text[pos] not in _SYMBOL_TO_OP:
        raise CalcParseError(f"expected operator at {pos} in {text!r}")
    op = _SYMBOL_TO_OP[text[pos]]
    right, pos = _parse_call(text, pos + 1)
    if pos >= len(text) or text[pos] != ")":
        raise CalcParseError(f"expected ')' at {pos} in {text!r}")
    return Node(op, left, right), pos + 1


def structurally_equal(a: ArithExpr, b: ArithExpr) -> bool:
    """True iff the trees are identical node for node."""
    return a == b


def leaf_values(expr: ArithExpr) -> tuple[int, ...]:
    """Operand values in left-to-right order."""
    if isinstance(expr, Leaf):
        return (expr.value,)
    return leaf_values(expr.left) + leaf_values(expr.right)


def op_sequence(expr: ArithExpr) -> tuple[Op, ...]:
    """Operators in reading (in-order) order."""
    if isinstance(expr, Leaf):
        return ()
    return op_sequence(expr.left) + (expr.op,) + op_sequence(expr.right)


def format_exact(q: Fraction) -> str:
    """Render a rational: integers plainly, terminating decimals exactly,
    everything else as p/q in lowest terms."""
    n, d = q.numerator, q.denominator
    if d == 1:
        return str(n)
    rest, twos, fives = d, 0, 0
    while rest % 2 == 0:
        rest //= 2
        twos += 1
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    if rest != 1:
        return f"{n}/{d}"
    k = max(twos, fives)
    digits = str(abs(n) * 10**k // d).rjust(k + 1, "0")
    sign = "-" if n < 0 else ""
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def parse_exact(s: str) -> Fraction:
    """Parse the format_exact output (also accepts any Fraction literal)."""
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise CalcParseError(f"not an exact number: {s!r}") from exc
