from __future__ import annotations

import random

import sys

import pytest

from mrkl.arithmetic import Leaf, Node, Op, structurally_equal, to_calculator_call
from mrkl.dataset import instantiate, sample_operands
from mrkl.extractor import (
    NOPARSE_AMBIGUOUS,
    NOPARSE_NO_MATCH,
    NOPARSE_UNKNOWN_VOCAB,
    BackendTransportError,
    Extraction,
    NoParse,
    ReferenceBackend,
    ReferenceExtractor,
    SubprocessBackend,
    extract,
    get_backend,
    normalize,
)
from mrkl.numword import Rendering
from mrkl.templates import catalog, template_by_id


def expect_expr(text: str) -> tuple:
    result = extract(text)
    assert isinstance(result, Extraction), f"{text!r} -> {result}"
    return result


class TestNormalize:
    def test_question(self):
        tokens = normalize("How much is 58 plus 12?")
        assert [(t.kind, t.text if t.kind != "num" else t.value) for t in tokens] == [
            ("word", "how"),
            ("word", "much"),
            ("word", "is"),
            ("num", 58),
            ("word", "plus"),
            ("num", 12),
        ]

    def test_empty(self):
        assert normalize("") == []

    def test_symbolic(self):
        tokens = normalize("3-1=?")
        assert [(t.kind, t.text if t.kind != "num" else t.value) for t in tokens] == [
            ("num", 3),
            ("sym", "-"),
            ("num", 1),
        ]

    def test_unicode_minus(self):
        tokens = normalize("3−1=?")
        assert [t.kind for t in tokens] == ["num", "sym", "num"]

    def test_catalog_misspellings_repaired(self):
        fixed = normalize("How much is 1 divided bu the sum of 2 and 3?")
        plain = normalize("How much is 1 divided by the sum of 2 and 3?")
        assert [t.text for t in fixed] == [t.text for t in plain]
        assert normalize("the diffrence between")[1].text == "difference"

    def test_word_numbers_merged(self):
        tokens = normalize("twenty seven plus thirteen")
        assert [(t.kind, t.value) for t in tokens if t.kind == "num"] == [
            ("num", 27),
            ("num", 13),
        ]


class TestExtractExamples:
    def test_mixed_rendering_subtraction(self):
        r = expect_expr("How much is three minus 1")
        assert r.expr == Node(Op.SUB, Leaf(3), Leaf(1))
        assert r.confidence == 1.0

    def test_nested_prefix(self):
        r = expect_expr("What is the sum of 2 and the product of 4 and 8?")
        assert to_calculator_call(r.expr) == "(2+(4*8))"

    def test_statement_format(self):
        r = expect_expr("The product of 7 and 6 is")
        assert r.expr == Node(Op.MUL, Leaf(7), Leaf(6))
        assert r.matched_template == "4:mul"

    def test_math_notation(self):
        r = expect_expr("3-1=?")
        assert r.expr == Node(Op.SUB, Leaf(3), Leaf(1))

    def test_symbolic_with_brackets(self):
        r = expect_expr("(2+4)*8")
        assert to_calculator_call(r.expr) == "((2+4)*8)"

    def test_precedence_in_free_text(self):
        r = expect_expr("How much is 2 plus 4 times 8?")
        assert to_calculator_call(r.expr) == "(2+(4*8))"

    def test_synonyms(self):
        assert expect_expr("what is 3 added to 4").expr == Node(Op.ADD, Leaf(3), Leaf(4))
        assert expect_expr("what is 9 less 4").expr == Node(Op.SUB, Leaf(9), Leaf(4))
        assert expect_expr("what is 3 multiplied by 4").expr == Node(Op.MUL, Leaf(3), Leaf(4))
        assert expect_expr("what is the ratio of 8 and 2").expr == Node(Op.DIV, Leaf(8), Leaf(2))

    def test_lexicon_synonym(self):
        r = expect_expr("How much is a dozen plus 3?")
        assert r.expr == Node(Op.ADD, Leaf(12), Leaf(3))

    def test_no_arithmetic(self):
        r = extract("What color is the sky?")
        assert isinstance(r, NoParse)
        assert r.reason == NOPARSE_UNKNOWN_VOCAB

    def test_known_words_but_no_problem(self):
        r = extract("What is the sum of 2?")
        assert isinstance(r, NoParse)
        assert r.reason == NOPARSE_NO_MATCH

    def test_bare_number_is_not_a_problem(self):
        assert isinstance(extract("42"), NoParse)
        assert isinstance(extract("what is 42"), NoParse)

    def test_ambiguous_refused(self):
        # "(2/4)*8" if the noun phrase ends at 4, "2/(4*8)" if it spans
        r = extract("the ratio between 2 and 4 times 8")
        assert isinstance(r, NoParse)
        assert r.reason == NOPARSE_AMBIGUOUS

    def test_empty_input(self):
        assert isinstance(extract(""), NoParse)


class TestRoundTripCompleteness:
    @pytest.mark.parametrize("rendering", [Rendering.DIGITS, Rendering.WORDS])
    def test_all_templates_all_digit_counts(self, rendering):
        rng = random.Random(17)
        for t in catalog(1) + catalog(2):
            for d in range(1, 10):
                operands = sample_operands(d, t, rng)
                ex = instantiate(t, operands, rendering)
                r = extract(ex.text)
                assert isinstance(r, Extraction), f"{ex.text!r} -> {r}"
                assert structurally_equal(r.expr, ex.expr), ex.text
                assert r.matched_template == t.template_id
                assert r.confidence == 1.0

    def test_verbatim_catalog_also_parses(self):
        rng = random.Random(18)
        for t in catalog(2, verbatim=True):
            operands = sample_operands(2, t, rng)
            ex = instantiate(t, operands, Rendering.DIGITS)
            r = extract(ex.text)
            assert isinstance(r, Extraction)
            assert structurally_equal(r.expr, ex.expr)

    def test_rendering_invariance(self):
        rng = random.Random(19)
        for t in catalog(1) + catalog(2):
            operands = sample_operands(rng.randint(1, 9), t, rng)
            digit_r = extract(instantiate(t, operands, Rendering.DIGITS).text)
            words_r = extract(instantiate(t, operands, Rendering.WORDS).text)
            assert isinstance(digit_r, Extraction) and isinstance(words_r, Extraction)
            assert structurally_equal(digit_r.expr, words_r.expr)


class TestNoFalseAccepts:
    def test_fixture_corpus(self, non_arithmetic_utterances):
        assert len(non_arithmetic_utterances) == 100
        for line in non_arithmetic_utterances:
            assert isinstance(extract(line), NoParse), line


class TestBackends:
    def test_reference_backend(self):
        backend = ReferenceBackend()
        assert backend.extract_call("How much is 58 plus 12?") == "(58+12)"
        assert backend.extract_call("hello").startswith("NOPARSE unknown vocabulary")

    def test_digits_only_backend(self):
        backend = get_backend("digits-only")
        assert backend.extract_call("How much is 58 plus 12?") == "(58+12)"
        response = backend.extract_call("How much is twenty seven plus thirteen?")
        assert response.startswith("NOPARSE")

    def test_word_numbers_disabled_extractor(self):
        ex = ReferenceExtractor(word_numbers=False)
        assert isinstance(ex.extract("How much is three minus 1"), NoParse)
        assert isinstance(ex.extract("How much is 3 minus 1"), Extraction)

    def test_unknown_backend_name(self):
        with pytest.raises(ValueError):
            get_backend("nonsense")

    def test_subprocess_backend_round_trip(self):
        script = (
            "import sys\n"
            "for line in sys.stdin:\n"
            "    sys.stdout.write('(1+1)\\n')\n"
            "    sys.stdout.flush()\n"
        )
        backend = SubprocessBackend([sys.executable, "-c", script], name="const")
        assert backend.extract_call("anything at all") == "(1+1)"
        assert backend.extract_call("line two") == "(1+1)"
        backend.close()

    def test_subprocess_backend_transport_error(self):
        backend = SubprocessBackend(f"{sys.executable} -c pass")  # exits immediately
        with pytest.raises(BackendTransportError):
            backend.extract_call("hello")

    def test_cmd_backend_name(self):
        backend = get_backend("cmd:cat")
        assert backend.name == "cmd:cat"
        assert backend.extract_call("(2+2)") == "(2+2)"  # cat echoes the line
        backend.close()
