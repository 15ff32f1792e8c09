"""The question-template catalog.

Single-operation problems come in 5 formats x 4 operations = 20 templates
with operand slots {x} and {y}. Two-operation problems come in 29 formulae
(every way to combine two of the four operators over operands A, B, C,
counting bracket placements that change the parse), each with one phrasing.

The shipped phrasings correct two spelling slips found in the source
catalog ("divided bu", "diffrence"); pass verbatim=True to get the
uncorrected text.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .arithmetic import ArithExpr, Leaf, Node, Op, op_sequence, structurally_equal

SLOT_NAMES = ("A", "B", "C")

SINGLE_OP_PHRASINGS: dict[tuple[int, Op], str] = {
    (0, Op.ADD): "How much is {x} plus {y}?",
    (0, Op.SUB): "How much is {x} minus {y}?",
    (0, Op.MUL): "How much is {x} times {y}?",
    (0, Op.DIV): "How much is {x} over {y}?",
    (1, Op.ADD): "What is {x} plus {y}?",
    (1, Op.SUB): "What is {x} minus {y}?",
    (1, Op.MUL): "What is {x} times {y}?",
    (1, Op.DIV): "What is {x} over {y}?",
    (2, Op.ADD): "What is the result of {x} plus {y}?",
    (2, Op.SUB): "What is the result of {x} minus {y}?",
    (2, Op.MUL): "What is the result of {x} times {y}?",
    (2, Op.DIV): "What is the result of {x} over {y}?",
    (3, Op.ADD): "What is the sum of {x} and {y}?",
    (3, Op.SUB): "What is the difference between {x} and {y}?",
    (3, Op.MUL): "What is the product of {x} and {y}?",
    (3, Op.DIV): "What is the ratio between {x} and {y}?",
    (4, Op.ADD): "The sum of {x} and {y} is",
    (4, Op.SUB): "The difference between {x} and {y} is",
    (4, Op.MUL): "The product of {x} and {y} is",
    (4, Op.DIV): "The ratio of {x} and {y} is",
}

# Formula ids and phrasings, in catalog order. The id string is also the
# formula notation: inner brackets are written only where the parse differs
# from operator precedence.
TWO_OP_PHRASINGS: tuple[tuple[str, str], ...] = (
    ("((A+B)*C)", "Sum A and B and multiply by C"),
    ("(A+B*C)", "What is the sum of A and the product of B and C?"),
    ("((A-B)*C)", "What is the product of A minus B and C?"),
    ("(A/(B/C))", "How much is A divided by the ratio between B and C?"),
    ("(A-B*C)", "What is the difference between A and the product of B and C?"),
    ("(A*(B-C))", "How much is A times the difference between B and C?"),
    ("((A+B)/C)", "What is the ratio between A plus B and C?"),
    ("(A-(B-C))", "How much is A minus the difference between B and C?"),
    ("((A-B)/C)", "What is the ratio between A minus B and C?"),
    ("(A-B/C)", "What is the difference between A and the ratio between B and C?"),
    ("(A/(B+C))", "How much is A divided by the sum of B and C?"),
    ("(A/(B-C))", "How much is A divided by the difference between B and C?"),
    ("(A+B/C)", "what is the sum of A and the ratio between B and C?"),
    ("(A*(B/C))", "How much is A times the ratio between B and C?"),
    ("(A*B+C)", "How much is the sum of A times B and C?"),
    ("(A*(B+C))", "How much is A times the sum of B and C?"),
    ("(A/B+C)", "How much is the sum of A divided by B and C?"),
    ("(A/B/C)", "How much is A divided by B divided by C?"),
    ("(A/B-C)", "How much is the difference between A divided by B and C?"),
    ("(A/B*C)", "How much is A divided by B times C?"),
    ("(A-(B+C))", "How much is A minus the sum of B and C?"),
    ("(A*B-C)", "How much is the difference between A times B and C?"),
    ("(A/(B*C))", "How much is A divided by the product of B and C?"),
    ("(A-B+C)", "How much is A minus B plus C?"),
    ("(A+B+C)", "How much is A plus B plus C?"),
    ("(A-B-C)", "How much is A minus B minus C?"),
    ("(A*B/C)", "How much is A times B divided by C?"),
    ("(A+B-C)", "How much is A plus B minus C?"),
    ("(A*B*C)", "How much is A times B times C?"),
)

# Uncorrected source text for the two entries the default catalog fixes.
VERBATIM_OVERRIDES: dict[str, str] = {
    "(A-(B-C))": "How much is A minus the diffrence between B and C?",
    "(A/(B+C))": "How much is A divided bu the sum of B and C?",
}


class FormulaError(ValueError):
    """Raised on a malformed formula notation string."""


@dataclass(frozen=True)
class Template:
    """One phrasing pattern with numbered operand slots.

    ``shape`` is an expression tree whose leaves hold slot indices
    (0 for {x}/A, 1 for {y}/B, 2 for C); substituting operands for the
    slot indices yields the gold expression.
    """

    arity: int  # number of operations (1 or 2)
    template_id: str
    phrasing: str
    shape: ArithExpr
    ops: tuple[Op, ...]  # operators in reading order
    format: int | None = None  # single-operation format 0-4
    formula: str | None = None  # two-operation formula notation
    requires_brackets: bool = False

    @property
    def operand_count(self) -> int:
        return self.arity + 1


def parse_formula(formula: str) -> ArithExpr:
    """Parse formula notation over slots A, B, C into a slot-leaf tree.

    Standard precedence (* and / bind tighter than + and -), left
    associative, with brackets overriding.
    """
    tokens = [ch for ch in formula if not ch.isspace()]
    expr, pos = _parse_sum(tokens, 0, formula)
    if pos != len(tokens):
        raise FormulaError(f"trailing input in formula {formula!r}")
    return expr


def _parse_sum(tokens: list[str], pos: int, src: str) -> tuple[ArithExpr, int]:
    expr, pos = _parse_product(tokens, pos, src)
    while pos < len(tokens) and tokens[pos] in "+-":
        op = Op.ADD if tokens[pos] == "+" else Op.SUB
        right, pos = _parse_product(tokens, pos + 1, src)
        expr = Node(op, expr, right)
    return expr, pos


def _parse_product(tokens: list[str], pos: int, src: str) -> tuple[ArithExpr, int]:
    expr, pos = _parse_atom(tokens, pos, src)
    while pos < len(tokens) and tokens[pos] in "*/":
        op = Op.MUL if tokens[pos] == "*" else Op.DIV
        right, pos = _parse_atom(tokens, pos + 1, src)
        expr = Node(op, expr, right)
    return expr, pos


def _parse_atom(tokens: list[str], pos: int, src: str) -> tuple[ArithExpr, int]:
    if pos >= len(tokens):
        raise FormulaError(f"unexpected end of formula {src!r}")
    tok = tokens[pos]
    if tok in SLOT_NAMES:
        return Leaf(SLOT_NAMES.index(tok)), pos + 1
    if tok == "(":
        expr, pos = _parse_sum(tokens, pos + 1, src)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise FormulaError(f"missing ')' in formula {src!r}")
        return expr, pos + 1
    raise FormulaError(f"unexpected token {tok!r} in formula {src!r}")


def formula_requires_brackets(formula: str) -> bool:
    """True iff the formula's parse differs from the precedence parse of
    its bracket-free operator sequence."""
    tree = parse_formula(formula)
    flat = formula.replace("(", "").replace(")", "")
    return not structurally_equal(tree, parse_formula(flat))


def substitute_operands(shape: ArithExpr, operands: tuple[int, ...]) -> ArithExpr:
    """Replace slot-index leaves with concrete operand values."""
    if isinstance(shape, Leaf):
        return Leaf(operands[shape.value])
    return Node(
        shape.op,
        substitute_operands(shape.left, operands),
        substitute_operands(shape.right, operands),
    )


@lru_cache(maxsize=None)
def catalog(arity: int, verbatim: bool = False) -> tuple[Template, ...]:
    """The fixed template catalog for the given operation count."""
    if arity == 1:
        out = []
        for fmt in range(5):
            for op in (Op.ADD, Op.SUB, Op.MUL, Op.DIV):
                out.append(
                    Template(
                        arity=1,
                        template_id=f"{fmt}:{op.key}",
                        phrasing=SINGLE_OP_PHRASINGS[(fmt, op)],
                        shape=Node(op, Leaf(0), Leaf(1)),
                        ops=(op,),
                        format=fmt,
                    )
                )
        return tuple(out)
    if arity == 2:
        out = []
        for formula, phrasing in TWO_OP_PHRASINGS:
            if verbatim and formula in VERBATIM_OVERRIDES:
                phrasing = VERBATIM_OVERRIDES[formula]
            shape = parse_formula(formula)
            out.append(
                Template(
                    arity=2,
                    template_id=formula,
                    phrasing=phrasing,
                    shape=shape,
                    ops=op_sequence(shape),
                    formula=formula,
                    requires_brackets=formula_requires_brackets(formula),
                )
            )
        return tuple(out)
    raise ValueError(f"arity must be 1 or 2, got {arity}")


def bracket_free_formulas() -> tuple[str, ...]:
    """The two-operation formulae expressible without brackets, in catalog
    order; exactly one per (first operation, second operation) pair."""
    return tuple(t.formula for t in catalog(2) if not t.requires_brackets)  # type: ignore[misc]


def bracketed_formulas() -> tuple[str, ...]:
    return tuple(t.formula for t in catalog(2) if t.requires_brackets)  # type: ignore[misc]


def template_by_id(template_id: str, verbatim: bool = False) -> Template:
    for t in catalog(1, verbatim) + catalog(2, verbatim):
        if t.template_id == template_id:
            return t
    raise KeyError(template_id)
