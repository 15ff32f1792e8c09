from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from mrkl.numword import (
    NumberParseError,
    NumberRangeError,
    Rendering,
    int_to_words,
    lex_numbers,
    words_to_int,
)


class TestIntToWords:
    def test_style_examples(self):
        assert int_to_words(48) == "forty eight"
        assert int_to_words(0) == "zero"
        assert int_to_words(12) == "twelve"
        assert int_to_words(123) == "one hundred twenty three"
        assert int_to_words(100) == "one hundred"
        assert int_to_words(1000) == "one thousand"
        assert int_to_words(105) == "one hundred five"
        assert int_to_words(999_999_999) == (
            "nine hundred ninety nine million nine hundred ninety nine thousand"
            " nine hundred ninety nine"
        )

    def test_no_hyphens_and_no_and(self):
        for n in (21, 101, 1_000_001, 987_654_321):
            words = int_to_words(n)
            assert "-" not in words
            assert " and " not in f" {words} "

    def test_out_of_range(self):
        with pytest.raises(NumberRangeError):
            int_to_words(-1)
        with pytest.raises(NumberRangeError):
            int_to_words(10**9)


class TestWordsToInt:
    def test_examples(self):
        assert words_to_int("twenty seven") == 27
        assert words_to_int("zero") == 0
        assert words_to_int("a dozen") == 12
        assert words_to_int("Twenty Seven") == 27  # case insensitive

    def test_custom_lexicon(self):
        assert words_to_int("a score", lexicon={"a score": 20}) == 20
        with pytest.raises(NumberParseError):
            words_to_int("a score")  # not in the default lexicon

    @pytest.mark.parametrize(
        "bad",
        ["forty ten", "seven twenty", "hundred", "one one", "twelve zero", "plus", "", "thousand million"],
    )
    def test_malformed(self, bad):
        with pytest.raises(NumberParseError):
            words_to_int(bad)

    def test_round_trip_oracle_frozen(self):
        # frozen expected value, checked against the independent renderer
        s = int_to_words(123_456_789)
        assert s == (
            "one hundred twenty three million four hundred fifty six thousand"
            " seven hundred eighty nine"
        )
        assert words_to_int(s) == 123_456_789

    @given(st.integers(min_value=0, max_value=10**9 - 1))
    def test_round_trip(self, n):
        assert words_to_int(int_to_words(n)) == n

    def test_injectivity_sampled(self):
        rng = random.Random(0)
        seen = {}
        for _ in range(3000):
            n = rng.randrange(10**9)
            words = int_to_words(n)
            assert seen.setdefault(words, n) == n


class TestLexNumbers:
    def test_digit_spans(self):
        tokens = lex_numbers("How much is 58 plus 12?")
        assert [(t.value, t.rendering) for t in tokens] == [
            (58, Rendering.DIGITS),
            (12, Rendering.DIGITS),
        ]

    def test_empty(self):
        assert lex_numbers("") == []

    def test_mixed_renderings(self):
        tokens = lex_numbers("three minus 1")
        assert [(t.value, t.rendering) for t in tokens] == [
            (3, Rendering.WORDS),
            (1, Rendering.DIGITS),
        ]

    def test_greedy_longest(self):
        tokens = lex_numbers("twenty seven plus thirteen")
        assert [t.value for t in tokens] == [27, 13]
        # invalid continuation backs off to two separate numbers
        assert [t.value for t in lex_numbers("forty ten")] == [40, 10]

    def test_long_word_number_span(self):
        text = "one hundred twenty three million four hundred fifty six thousand seven hundred eighty nine"
        tokens = lex_numbers(text)
        assert [t.value for t in tokens] == [123_456_789]
        assert tokens[0].surface == text

    def test_lexicon_phrases(self):
        tokens = lex_numbers("add a dozen eggs")
        assert [t.value for t in tokens] == [12]
        assert tokens[0].surface == "a dozen"
        assert lex_numbers("a cat sat") == []

    def test_noncanonical_digit_spans_skipped(self):
        assert lex_numbers("agent 007") == []
        assert lex_numbers("id 1234567890 overflowed") == []  # 10 digits

    def test_word_numbers_disabled(self):
        tokens = lex_numbers("three minus 1", word_numbers=False)
        assert [t.value for t in tokens] == [1]

    def test_token_invariants(self):
        text = "From twenty one to 99 in one hundred five steps"
        for token in lex_numbers(text):
            assert text[token.start : token.end] == token.surface
            if token.rendering is Rendering.DIGITS:
                assert token.surface == str(token.value)
            else:
                assert words_to_int(token.surface) == token.value
