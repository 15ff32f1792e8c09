"""Synthetic dataset generation and the per-experiment split protocols.

Dataset file format (versioned, line oriented): the first line is a header
object ``{"schema": "mrkl-dataset", "version": 1, ...}``; every following
line is one example record with fields

    id, text, formula, answer, digits, format_id, rendering, ops, split

where ``formula`` is the calculator-call string of the gold expression and
``answer`` its exact value (see arithmetic.format_exact). Files are byte
identical for identical spec + seed.

Experiment protocols (counts per split):

  1  digit generalization   train 40 single-digit pairs, test the other 41
                            plus 50 random pairs per digit count 2-9;
                            format 0, digits only, one operation
  2  digits vs words        per digit count, up to 200 distinct pairs split
                            equally train/test, instantiated in both
                            renderings from the same pairs; format 0
  3  question formats       train 400 format-0; dev/test 200 per format
  4  operations             per operation 635 train / 315 dev / 315 test
     (two_op variant)       per formula 120 examples split 40/40/40
  5  operation count        train 700 single-operation; dev/test 210 per
                            bracket-free two-operation formula; digits 1-7
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .arithmetic import (
    ArithExpr,
    EvaluationError,
    Op,
    OPS,
    evaluate,
    format_exact,
    op_sequence,
    parse_calculator_call,
    parse_exact,
    to_calculator_call,
)
from .numword import Rendering, int_to_words
from .templates import Template, bracket_free_formulas, bracketed_formulas, catalog, substitute_operands

SPLITS = ("train", "dev", "test")

DATASET_SCHEMA = "mrkl-dataset"
DATASET_VERSION = 1


class GenerationError(RuntimeError):
    """Raised when a spec asks for more distinct expressions than exist."""


@dataclass(frozen=True)
class Example:
    """One dataset record."""

    id: str
    text: str
    expr: ArithExpr
    answer: Fraction
    digits: tuple[int, ...]
    format_id: int | str
    rendering: Rendering
    ops: tuple[str, ...]
    split: str

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "formula": to_calculator_call(self.expr),
            "answer": format_exact(self.answer),
            "digits": list(self.digits),
            "format_id": self.format_id,
            "rendering": self.rendering.value,
            "ops": list(self.ops),
            "split": self.split,
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "Example":
        expr = parse_calculator_call(record["formula"])
        return cls(
            id=record["id"],
            text=record["text"],
            expr=expr,
            answer=parse_exact(record["answer"]),
            digits=tuple(record["digits"]),
            format_id=record["format_id"],
            rendering=Rendering(record["rendering"]),
            ops=tuple(record["ops"]),
            split=record["split"],
        )


@dataclass(frozen=True)
class DatasetSpec:
    """What to generate. ``experiment`` selects a protocol above; None plus
    ``counts`` generates a custom single-operation dataset."""

    experiment: int | None
    seed: int = 0
    two_op: bool = False  # experiment 4 two-operation variant
    operation: Op = Op.ADD  # experiments 1 and 2 fix one operation
    digit_range: tuple[int, int] = (1, 9)
    renderings: tuple[Rendering, ...] = (Rendering.DIGITS,)
    operations: tuple[Op, ...] = OPS
    formats: tuple[int, ...] = (0, 1, 2, 3, 4)
    counts: Mapping[str, int] | None = None  # custom: examples per split
    verbatim_catalog: bool = False

    def validate(self) -> None:
        lo, hi = self.digit_range
        if not (1 <= lo <= hi <= 9):
            raise GenerationError(f"digit range must lie within [1, 9]: {self.digit_range}")
        if self.experiment is None and not self.counts:
            raise GenerationError("custom spec requires counts per split")
        if self.counts and any(n <= 0 for n in self.counts.values()):
            raise GenerationError(f"split counts must be positive: {dict(self.counts)}")
        if self.experiment is not None and self.experiment not in (1, 2, 3, 4, 5):
            raise GenerationError(f"unknown experiment id: {self.experiment}")


def experiment_spec(
    experiment: int,
    seed: int = 0,
    *,
    operation: Op = Op.ADD,
    two_op: bool = False,
    verbatim_catalog: bool = False,
) -> DatasetSpec:
    """The canonical spec for one of the five experiment protocols."""
    if experiment == 2:
        renderings: tuple[Rendering, ...] = (Rendering.DIGITS, Rendering.WORDS)
    else:
        renderings = (Rendering.DIGITS,)
    return DatasetSpec(
        experiment=experiment,
        seed=seed,
        two_op=two_op and experiment == 4,
        operation=operation,
        digit_range=(1, 7) if experiment == 5 else (1, 9),
        renderings=renderings,
        verbatim_catalog=verbatim_catalog,
    )


@dataclass
class Dataset:
    spec: DatasetSpec
    examples: list[Example] = field(default_factory=list)

    def split(self, name: str) -> list[Example]:
        return [e for e in self.examples if e.split == name]

    def counts(self) -> dict[str, int]:
        out = {name: 0 for name in SPLITS}
        for e in self.examples:
            out[e.split] = out.get(e.split, 0) + 1
        return out

    def header(self) -> dict:
        return {
            "schema": DATASET_SCHEMA,
            "version": DATASET_VERSION,
            "experiment": self.spec.experiment,
            "two_op": self.spec.two_op,
            "seed": self.spec.seed,
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header(), sort_keys=True)]
        lines.extend(json.dumps(e.to_record(), sort_keys=True) for e in self.examples)
        return "\n".join(lines) + "\n"

    def write_jsonl(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def read_jsonl(cls, path: str | Path) -> "Dataset":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines:
            raise ValueError(f"empty dataset file: {path}")
        header = json.loads(lines[0])
        if header.get("schema") != DATASET_SCHEMA:
            raise ValueError(f"not a dataset file (schema {header.get('schema')!r}): {path}")
        spec = DatasetSpec(
            experiment=header.get("experiment"),
            seed=header.get("seed", 0),
            two_op=header.get("two_op", False),
            counts={"train": 1},  # placeholder; counts are not round-tripped
        )
        examples = [Example.from_record(json.loads(line)) for line in lines[1:] if line]
        return cls(spec=spec, examples=examples)

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode("utf-8")).hexdigest()


def _rand_operand(digit_count: int, rng: random.Random) -> int:
    if digit_count == 1:
        return rng.randint(1, 9)  # zero excluded
    return rng.randint(10 ** (digit_count - 1), 10**digit_count - 1)


def operand_space(digit_count: int) -> int:
    """Distinct operand values with the given digit count."""
    return 9 if digit_count == 1 else 9 * 10 ** (digit_count - 1)


def sample_operands(digit_count: int, template: Template, rng: random.Random) -> tuple[int, ...]:
    """Draw operands uniformly for one example; resamples until no divisor
    subexpression evaluates to zero (e.g. B != C in A/(B-C))."""
    while True:
        operands = tuple(_rand_operand(digit_count, rng) for _ in range(template.operand_count))
        try:
            evaluate(substitute_operands(template.shape, operands))
        except EvaluationError:
            continue
        return operands


def instantiate(
    template: Template,
    operands: tuple[int, ...],
    rendering: Rendering,
    *,
    split: str = "train",
) -> Example:
    """Fill a template's slots with rendered operands."""
    if len(operands) != template.operand_count:
        raise ValueError(
            f"template {template.template_id} takes {template.operand_count} operands, got {len(operands)}"
        )
    rendered = [
        str(v) if rendering is Rendering.DIGITS else int_to_words(v) for v in operands
    ]
    text = template.phrasing
    if template.arity == 1:
        text = text.replace("{x}", rendered[0]).replace("{y}", rendered[1])
    else:
        for slot, value in zip(("A", "B", "C"), rendered):
            text = text.replace(slot, value, 1)
    expr = substitute_operands(template.shape, operands)
    digits = tuple(len(str(v)) for v in operands)
    return Example(
        id=f"{template.template_id}|{','.join(str(v) for v in operands)}|{rendering.value}",
        text=text,
        expr=expr,
        answer=evaluate(expr),
        digits=digits,
        format_id=template.format if template.arity == 1 else template.formula,  # type: ignore[arg-type]
        rendering=rendering,
        ops=tuple(op.key for op in template.ops),
        split=split,
    )


class _DistinctSampler:
    """Draws expressions that are distinct (as trees) across the whole
    dataset, so train never shares an expression with dev or test.

    The digit count is redrawn together with the operands, so when a small
    digit cell saturates (an operation has only 81 one-digit pairs) the
    remaining draws spill into digit counts that still have room."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.seen: set[str] = set()

    def draw(self, template: Template, lo: int, hi: int) -> tuple[int, ...]:
        for _ in range(500_000):
            digit_count = self.rng.randint(lo, hi)
            operands = sample_operands(digit_count, template, self.rng)
            key = to_calculator_call(substitute_operands(template.shape, operands))
            if key not in self.seen:
                self.seen.add(key)
                return operands
        raise GenerationError(
            f"could not draw a fresh expression for {template.template_id} at {lo}-{hi} digits"
        )


def _single_template(spec: DatasetSpec, fmt: int, op: Op) -> Template:
    for t in catalog(1, spec.verbatim_catalog):
        if t.format == fmt and t.ops == (op,):
            return t
    raise KeyError((fmt, op))


def _distinct_pairs(n: int, digit_count: int, rng: random.Random) -> list[tuple[int, int]]:
    space = operand_space(digit_count) ** 2
    if n > space:
        raise GenerationError(
            f"{n} distinct pairs requested but only {space} exist at {digit_count} digits"
        )
    if digit_count == 1:
        pairs = [(x, y) for x in range(1, 10) for y in range(1, 10)]
        rng.shuffle(pairs)
        return pairs[:n]
    seen: set[tuple[int, int]] = set()
    out: list[tuple[int, int]] = []
    while len(out) < n:
        pair = (_rand_operand(digit_count, rng), _rand_operand(digit_count, rng))
        if pair not in seen:
            seen.add(pair)
            out.append(pair)
    return out


def _gen_exp1(spec: DatasetSpec, rng: random.Random) -> list[Example]:
    t = _single_template(spec, 0, spec.operation)
    pairs = _distinct_pairs(81, 1, rng)
    examples = [instantiate(t, p, Rendering.DIGITS, split="train") for p in pairs[:40]]
    examples += [instantiate(t, p, Rendering.DIGITS, split="test") for p in pairs[40:]]
    for d in range(2, 10):
        for p in _distinct_pairs(50, d, rng):
            examples.append(instantiate(t, p, Rendering.DIGITS, split="test"))
    return examples


def _gen_exp2(spec: DatasetSpec, rng: random.Random) -> list[Example]:
    # Pairs are drawn once per digit count and shared by both renderings,
    # so a test expression never appears in training under either wording.
    t = _single_template(spec, 0, spec.operation)
    examples = []
    for d in range(1, 10):
        n = min(200, operand_space(d) ** 2)
        pairs = _distinct_pairs(n, d, rng)
        cut = n // 2
        for rendering in spec.renderings:
            examples += [instantiate(t, p, rendering, split="train") for p in pairs[:cut]]
            examples += [instantiate(t, p, rendering, split="test") for p in pairs[cut:]]
    return examples


def _gen_exp3(spec: DatasetSpec, rng: random.Random) -> list[Example]:
    sampler = _DistinctSampler(rng)
    lo, hi = spec.digit_range
    examples = []
    for op in spec.operations:  # train: 400 format-0, evenly over operations
        t = _single_template(spec, 0, op)
        for _ in range(100):
            operands = sampler.draw(t, lo, hi)
            examples.append(instantiate(t, operands, Rendering.DIGITS, split="train"))
    for split in ("dev", "test"):  # 200 per format = 50 per (format, op)
        for fmt in spec.formats:
            for op in spec.operations:
                t = _single_template(spec, fmt, op)
                for _ in range(50):
                    operands = sampler.draw(t, lo, hi)
                    examples.append(instantiate(t, operands, Rendering.DIGITS, split=split))
    return examples


def _gen_exp4_single(spec: DatasetSpec, rng: random.Random) -> list[Example]:
    sampler = _DistinctSampler(rng)
    lo, hi = spec.digit_range
    per_format = {"train": 127, "dev": 63, "test": 63}  # x5 formats = 635/315/315
    examples = []
    for op in spec.operations:
        for split, n in per_format.items():
            for fmt in spec.formats:
                t = _single_template(spec, fmt, op)
                for _ in range(n):
                    operands = sampler.draw(t, lo, hi)
                    examples.append(instantiate(t, operands, Rendering.DIGITS, split=split))
    return examples


def _gen_exp4_two_op(spec: DatasetSpec, rng: random.Random) -> list[Example]:
    sampler = _DistinctSampler(rng)
    lo, hi = spec.digit_range
    examples = []
    for t in catalog(2, spec.verbatim_catalog):
        for split in SPLITS:  # 120 per formula, 40 per split
            for _ in range(40):
                operands = sampler.draw(t, lo, hi)
                examples.append(instantiate(t, operands, Rendering.DIGITS, split=split))
    return examples


def _gen_exp5(spec: DatasetSpec, rng: random.Random) -> list[Example]:
    sampler = _DistinctSampler(rng)
    lo, hi = spec.digit_range
    examples = []
    for op in spec.operations:  # train: 700 single-operation, evenly spread
        for fmt in spec.formats:
            t = _single_template(spec, fmt, op)
            for _ in range(35):
                operands = sampler.draw(t, lo, hi)
                examples.append(instantiate(t, operands, Rendering.DIGITS, split="train"))
    free = set(bracket_free_formulas())
    for t in catalog(2, spec.verbatim_catalog):
        if t.formula not in free:
            continue
        for split in ("dev", "test"):
            for _ in range(210):
                operands = sampler.draw(t, lo, hi)
                examples.append(instantiate(t, operands, Rendering.DIGITS, split=split))
    return examples


def _gen_custom(spec: DatasetSpec, rng: random.Random) -> list[Example]:
    templates = [
        _single_template(spec, fmt, op) for fmt in spec.formats for op in spec.operations
    ]
    lo, hi = spec.digit_range
    total = sum(spec.counts.values())  # type: ignore[union-attr]
    space = len(spec.operations) * sum(operand_space(d) ** 2 for d in range(lo, hi + 1))
    if total > space:
        raise GenerationError(
            f"{total} examples requested but only {space} distinct expressions exist"
        )
    sampler = _DistinctSampler(rng)
    examples = []
    for split in SPLITS:
        for _ in range(spec.counts.get(split, 0)):  # type: ignore[union-attr]
            t = rng.choice(templates)
            operands = sampler.draw(t, lo, hi)
            examples.append(instantiate(t, operands, rng.choice(spec.renderings), split=split))
    return examples


def generate(spec: DatasetSpec) -> Dataset:
    """Generate a dataset; deterministic given spec + seed."""
    spec.validate()
    rng = random.Random(spec.seed)
    if spec.experiment == 1:
        examples = _gen_exp1(spec, rng)
    elif spec.experiment == 2:
        examples = _gen_exp2(spec, rng)
    elif spec.experiment == 3:
        examples = _gen_exp3(spec, rng)
    elif spec.experiment == 4:
        examples = _gen_exp4_two_op(spec, rng) if spec.two_op else _gen_exp4_single(spec, rng)
    elif spec.experiment == 5:
        examples = _gen_exp5(spec, rng)
    else:
        examples = _gen_custom(spec, rng)
    dataset = Dataset(spec=spec, examples=examples)
    if not check_no_overlap(dataset):
        raise GenerationError("generator produced a train/eval expression overlap")
    return dataset


def check_no_overlap(dataset: Dataset) -> bool:
    """True iff no dev/test gold expression equals a training one as a tree.
    Wording differences do not excuse overlap: the comparison ignores the
    question text entirely."""
    train_keys = {to_calculator_call(e.expr) for e in dataset.examples if e.split == "train"}
    return not any(
        to_calculator_call(e.expr) in train_keys
        for e in dataset.examples
        if e.split in ("dev", "test")
    )


def two_op_split(rng: random.Random) -> tuple[list[str], list[str]]:
    """Partition the 29 two-operation formulae into 14 train / 15 test with
    exactly one bracket-requiring formula on the training side."""
    bracketed = list(bracketed_formulas())
    free = list(bracket_free_formulas())
    train = {rng.choice(bracketed), *rng.sample(free, 13)}
    order = [t.formula for t in catalog(2)]
    return (
        [f for f in order if f in train],
        [f for f in order if f not in train],
    )
