from __future__ import annotations

import random
from collections import Counter
from fractions import Fraction

import pytest

from mrkl.arithmetic import Op, evaluate, to_calculator_call
from mrkl.dataset import (
    Dataset,
    DatasetSpec,
    Example,
    GenerationError,
    check_no_overlap,
    experiment_spec,
    generate,
    instantiate,
    operand_space,
    sample_operands,
    two_op_split,
)
from mrkl.numword import Rendering
from mrkl.templates import bracket_free_formulas, bracketed_formulas, catalog, template_by_id


class TestSampleOperands:
    def test_digit_ranges(self):
        rng = random.Random(0)
        t = template_by_id("0:add")
        for _ in range(500):
            (x, y) = sample_operands(1, t, rng)
            assert 1 <= x <= 9 and 1 <= y <= 9
        for _ in range(500):
            (x, y) = sample_operands(3, t, rng)
            assert 100 <= x <= 999 and 100 <= y <= 999

    def test_divisor_subexpression_never_zero(self):
        rng = random.Random(1)
        t = template_by_id("(A/(B-C))")
        for _ in range(10_000):
            a, b, c = sample_operands(1, t, rng)
            assert b != c

    def test_operand_space(self):
        assert operand_space(1) == 9
        assert operand_space(3) == 900


class TestInstantiate:
    def test_digits_rendering(self):
        ex = instantiate(template_by_id("0:add"), (58, 12), Rendering.DIGITS)
        assert ex.text == "How much is 58 plus 12?"
        assert ex.answer == 70
        assert ex.digits == (2, 2)
        assert ex.format_id == 0
        assert ex.ops == ("add",)

    def test_words_rendering(self):
        ex = instantiate(template_by_id("0:add"), (27, 13), Rendering.WORDS)
        assert ex.text == "How much is twenty seven plus thirteen?"
        assert ex.answer == 40
        assert ex.rendering is Rendering.WORDS

    def test_two_op(self):
        ex = instantiate(template_by_id("((A+B)*C)"), (1, 1, 1), Rendering.DIGITS)
        assert ex.text == "Sum 1 and 1 and multiply by 1"
        assert ex.answer == 2
        assert ex.format_id == "((A+B)*C)"

    def test_answer_matches_evaluated_expression(self):
        rng = random.Random(2)
        for t in catalog(1) + catalog(2):
            operands = sample_operands(rng.randint(1, 9), t, rng)
            ex = instantiate(t, operands, Rendering.DIGITS)
            assert ex.answer == evaluate(ex.expr)

    def test_wrong_arity_rejected(self):
        with pytest.raises(ValueError):
            instantiate(template_by_id("0:add"), (1, 2, 3), Rendering.DIGITS)

    def test_record_round_trip(self):
        ex = instantiate(template_by_id("(A/B/C)"), (5, 2, 4), Rendering.DIGITS, split="dev")
        back = Example.from_record(ex.to_record())
        assert back == ex
        assert back.answer == Fraction(5, 8)


class TestExperiment1:
    def test_counts(self):
        ds = generate(experiment_spec(1, seed=7))
        assert len(ds.split("train")) == 40
        test = ds.split("test")
        assert len([e for e in test if e.digits == (1, 1)]) == 41
        for d in range(2, 10):
            assert len([e for e in test if e.digits == (d, d)]) == 50
        assert ds.split("dev") == []

    def test_single_digit_pairs_partition_the_81(self):
        ds = generate(experiment_spec(1, seed=3))
        single = [e for e in ds.examples if e.digits == (1, 1)]
        pairs = {tuple(v for v in e.to_record()["formula"] if v.isdigit()) for e in single}
        assert len(single) == 81
        assert len(pairs) == 81  # 40 train + 41 test cover all of 9 x 9

    def test_operation_setting(self):
        ds = generate(experiment_spec(1, seed=7, operation=Op.MUL))
        assert {e.ops for e in ds.examples} == {("mul",)}
        assert {e.format_id for e in ds.examples} == {0}


class TestExperiment2:
    def test_counts_per_rendering_and_digit(self):
        ds = generate(experiment_spec(2, seed=7))
        by = Counter((e.rendering.value, e.digits[0], e.split) for e in ds.examples)
        for rendering in ("digits", "words"):
            assert by[(rendering, 1, "train")] == 40  # capped by the 81 distinct pairs
            assert by[(rendering, 1, "test")] == 41
            for d in range(2, 10):
                assert by[(rendering, d, "train")] == 100
                assert by[(rendering, d, "test")] == 100

    def test_same_expressions_in_both_renderings(self):
        ds = generate(experiment_spec(2, seed=7))
        for split in ("train", "test"):
            exprs = {}
            for e in ds.split(split):
                exprs.setdefault(e.rendering.value, set()).add(to_calculator_call(e.expr))
            assert exprs["digits"] == exprs["words"]

    def test_no_cross_rendering_leakage(self):
        ds = generate(experiment_spec(2, seed=7))
        train = {to_calculator_call(e.expr) for e in ds.split("train")}
        test = {to_calculator_call(e.expr) for e in ds.split("test")}
        assert not train & test


class TestExperiment3:
    def test_counts(self):
        ds = generate(experiment_spec(3, seed=7))
        assert len(ds.split("train")) == 400
        assert all(e.format_id == 0 for e in ds.split("train"))
        for split in ("dev", "test"):
            by_format = Counter(e.format_id for e in ds.split(split))
            assert by_format == {fmt: 200 for fmt in range(5)}


class TestExperiment4:
    def test_single_op_counts(self):
        ds = generate(experiment_spec(4, seed=7))
        for op in ("add", "sub", "mul", "div"):
            per_op = [e for e in ds.examples if e.ops == (op,)]
            by_split = Counter(e.split for e in per_op)
            assert by_split == {"train": 635, "dev": 315, "test": 315}

    def test_two_op_counts(self):
        ds = generate(experiment_spec(4, seed=7, two_op=True))
        by = Counter((e.format_id, e.split) for e in ds.examples)
        for t in catalog(2):
            assert by[(t.formula, "train")] == 40
            assert by[(t.formula, "dev")] == 40
            assert by[(t.formula, "test")] == 40


class TestExperiment5:
    def test_counts_and_digit_cap(self):
        ds = generate(experiment_spec(5, seed=7))
        assert len(ds.split("train")) == 700
        assert all(len(e.ops) == 1 for e in ds.split("train"))
        free = set(bracket_free_formulas())
        for split in ("dev", "test"):
            by_formula = Counter(e.format_id for e in ds.split(split))
            assert by_formula == {f: 210 for f in free}
        assert max(d for e in ds.examples for d in e.digits) <= 7

    def test_test_side_covers_all_16_op_pairs(self):
        ds = generate(experiment_spec(5, seed=7))
        pairs = {e.ops for e in ds.split("test")}
        assert len(pairs) == 16


class TestGenerateGeneral:
    def test_deterministic_bit_identical(self):
        a = generate(experiment_spec(3, seed=11)).to_jsonl()
        b = generate(experiment_spec(3, seed=11)).to_jsonl()
        assert a == b

    def test_seed_changes_output(self):
        a = generate(experiment_spec(1, seed=0)).to_jsonl()
        b = generate(experiment_spec(1, seed=1)).to_jsonl()
        assert a != b

    def test_file_round_trip(self, tmp_path):
        ds = generate(experiment_spec(1, seed=5))
        path = tmp_path / "ds.jsonl"
        ds.write_jsonl(path)
        back = Dataset.read_jsonl(path)
        assert back.examples == ds.examples
        assert back.to_jsonl() == ds.to_jsonl()

    def test_every_experiment_passes_overlap_audit(self):
        for exp, kwargs in [(1, {}), (2, {}), (3, {}), (4, {}), (4, {"two_op": True}), (5, {})]:
            ds = generate(experiment_spec(exp, seed=7, **kwargs))
            assert check_no_overlap(ds)

    def test_custom_spec(self):
        spec = DatasetSpec(
            experiment=None,
            seed=2,
            counts={"train": 30, "test": 30},
            formats=(0,),
            operations=(Op.ADD,),
            digit_range=(1, 2),
        )
        ds = generate(spec)
        assert ds.counts() == {"train": 30, "dev": 0, "test": 30}
        assert check_no_overlap(ds)

    def test_infeasible_spec_raises(self):
        spec = DatasetSpec(
            experiment=None,
            seed=2,
            counts={"train": 60, "test": 60},
            formats=(0,),
            operations=(Op.ADD,),
            digit_range=(1, 1),  # only 81 distinct pairs exist
        )
        with pytest.raises(GenerationError):
            generate(spec)

    def test_bad_specs_rejected(self):
        with pytest.raises(GenerationError):
            DatasetSpec(experiment=9, seed=0).validate()
        with pytest.raises(GenerationError):
            DatasetSpec(experiment=None, seed=0, counts={"train": 0}).validate()
        with pytest.raises(GenerationError):
            DatasetSpec(experiment=1, seed=0, digit_range=(0, 9)).validate()


class TestOverlapCheck:
    def test_same_expression_different_wording_is_overlap(self):
        train = instantiate(template_by_id("0:add"), (3, 1), Rendering.DIGITS, split="train")
        test = instantiate(template_by_id("1:add"), (3, 1), Rendering.DIGITS, split="test")
        ds = Dataset(spec=experiment_spec(1), examples=[train, test])
        assert not check_no_overlap(ds)

    def test_distinct_trees_are_fine(self):
        train = instantiate(template_by_id("0:add"), (3, 1), Rendering.DIGITS, split="train")
        test = instantiate(template_by_id("0:add"), (1, 3), Rendering.DIGITS, split="test")
        ds = Dataset(spec=experiment_spec(1), examples=[train, test])
        assert check_no_overlap(ds)


class TestTwoOpSplit:
    def test_ten_seeded_splits(self):
        bracketed = set(bracketed_formulas())
        for seed in range(10):
            train, test = two_op_split(random.Random(seed))
            assert len(train) == 14
            assert len(test) == 15
            assert not set(train) & set(test)
            assert set(train) | set(test) == {t.formula for t in catalog(2)}
            assert len(set(train) & bracketed) == 1

    def test_deterministic(self):
        assert two_op_split(random.Random(3)) == two_op_split(random.Random(3))
