from __future__ import annotations

import json

import pytest

from mrkl.arithmetic import Leaf, Node, Op, OPS, evaluate, op_sequence
from mrkl.templates import (
    FormulaError,
    VERBATIM_OVERRIDES,
    bracket_free_formulas,
    bracketed_formulas,
    catalog,
    formula_requires_brackets,
    parse_formula,
    substitute_operands,
    template_by_id,
)


class TestSingleOpCatalog:
    def test_size(self):
        assert len(catalog(1)) == 20  # 5 formats x 4 operations

    def test_matches_transcription(self, data_dir):
        transcription = json.loads((data_dir / "single_op_templates.json").read_text())
        for op in OPS:
            for fmt, expected in enumerate(transcription["formats"][op.key]):
                assert template_by_id(f"{fmt}:{op.key}").phrasing == expected

    def test_named_example(self):
        assert template_by_id("3:sub").phrasing == "What is the difference between {x} and {y}?"

    def test_shapes(self):
        for t in catalog(1):
            assert t.shape == Node(t.ops[0], Leaf(0), Leaf(1))
            assert t.operand_count == 2

    def test_stable_ordering(self):
        ids = [t.template_id for t in catalog(1)]
        assert ids[:4] == ["0:add", "0:sub", "0:mul", "0:div"]
        assert ids == sorted(ids, key=lambda s: (int(s.split(":")[0]), ids.index(s)))


class TestTwoOpCatalog:
    def test_size(self):
        assert len(catalog(2)) == 29

    def test_matches_transcription(self, data_dir):
        transcription = json.loads((data_dir / "two_op_templates.json").read_text())
        entries = transcription["entries"]
        assert [t.formula for t in catalog(2)] == [e["formula"] for e in entries]
        assert [t.phrasing for t in catalog(2)] == [e["phrasing"] for e in entries]
        verbatim = {e["formula"]: e.get("verbatim", e["phrasing"]) for e in entries}
        assert [t.phrasing for t in catalog(2, verbatim=True)] == [
            verbatim[t.formula] for t in catalog(2)
        ]

    def test_verbatim_mode_differs_in_exactly_two_entries(self):
        default = {t.formula: t.phrasing for t in catalog(2)}
        verbatim = {t.formula: t.phrasing for t in catalog(2, verbatim=True)}
        changed = {f for f in default if default[f] != verbatim[f]}
        assert changed == set(VERBATIM_OVERRIDES)
        assert len(changed) == 2

    def test_count_matches_operator_grid(self):
        # one formula per (op1, op2) pair when precedence already gives the
        # intended parse, two when a bracketed variant parses differently
        by_pair: dict[tuple[Op, Op], int] = {}
        for t in catalog(2):
            pair = (t.ops[0], t.ops[1])
            by_pair[pair] = by_pair.get(pair, 0) + 1
        assert len(by_pair) == 16
        assert sum(by_pair.values()) == 29
        assert all(n in (1, 2) for n in by_pair.values())

    def test_bracket_partition(self):
        free = bracket_free_formulas()
        bracketed = bracketed_formulas()
        assert len(free) == 16
        assert len(bracketed) == 13
        assert set(free) | set(bracketed) == {t.formula for t in catalog(2)}
        # the bracket-free formulae are exactly the ones written without
        # inner brackets, one per operator pair
        assert all("(" not in f[1:-1] for f in free)
        pairs = {tuple(template_by_id(f).ops) for f in free}
        assert len(pairs) == 16

    def test_each_phrasing_mentions_slots_once(self):
        for t in catalog(2):
            for slot in ("A", "B", "C"):
                assert t.phrasing.count(slot) == 1, t.formula


class TestFormulaParsing:
    def test_precedence(self):
        assert parse_formula("(A+B*C)") == Node(Op.ADD, Leaf(0), Node(Op.MUL, Leaf(1), Leaf(2)))
        assert parse_formula("((A+B)*C)") == Node(Op.MUL, Node(Op.ADD, Leaf(0), Leaf(1)), Leaf(2))
        assert parse_formula("(A-B-C)") == Node(Op.SUB, Node(Op.SUB, Leaf(0), Leaf(1)), Leaf(2))

    def test_requires_brackets(self):
        assert formula_requires_brackets("((A+B)*C)")
        assert formula_requires_brackets("(A-(B-C))")
        assert not formula_requires_brackets("(A+B*C)")
        assert not formula_requires_brackets("(A*B/C)")
        # value-equal but structurally bracketed: still counts as bracketed
        assert formula_requires_brackets("(A*(B/C))")

    def test_substitute_and_evaluate(self):
        shape = parse_formula("((A+B)*C)")
        expr = substitute_operands(shape, (1, 1, 1))
        assert evaluate(expr) == 2
        assert op_sequence(expr) == (Op.ADD, Op.MUL)

    @pytest.mark.parametrize("bad", ["", "(A+", "A+D", "(A++B)", "(A+B))"])
    def test_malformed(self, bad):
        with pytest.raises(FormulaError):
            parse_formula(bad)
