"""Bidirectional integer <-> English-words conversion and a number lexer.

Word style is American short scale, lowercase, space separated, with no
hyphens and no "and" ("one hundred twenty three"). Values are limited to
0 <= n < 10**9 (1-9 decimal digits, or zero).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Mapping

MAX_VALUE = 10**9

_ONES = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS = ["twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"]
_SCALES = [("million", 10**6), ("thousand", 10**3)]

_ONES_MAP = {w: i for i, w in enumerate(_ONES)}
_TENS_MAP = {w: (i + 2) * 10 for i, w in enumerate(_TENS)}

# Multi-word synonyms accepted on input only (never emitted). Extend by
# passing a custom mapping to words_to_int / lex_numbers.
DEFAULT_LEXICON: Mapping[str, int] = {"a dozen": 12}

NUMBER_WORDS = frozenset(_ONES) | frozenset(_TENS) | {"hundred", "million", "thousand"}


class Rendering(str, enum.Enum):
    DIGITS = "digits"
    WORDS = "words"

    def __str__(self) -> str:  # keep file/report fields plain
        return self.value


class NumberRangeError(ValueError):
    """Value outside the supported 0 <= n < 10**9 range."""


class NumberParseError(ValueError):
    """Input is not a well-formed English number phrase."""


@dataclass(frozen=True)
class NumberToken:
    """A number span found in text."""

    value: int
    surface: str
    rendering: Rendering
    start: int
    end: int


def _three_digits_to_words(n: int) -> str:
    # 1 <= n <= 999
    parts = []
    hundreds, rest = divmod(n, 100)
    if hundreds:
        parts.append(_ONES[hundreds])
        parts.append("hundred")
    if rest >= 20:
        tens, ones = divmod(rest, 10)
        parts.append(_TENS[tens - 2])
        if ones:
            parts.append(_ONES[ones])
    elif rest:
        parts.append(_ONES[rest])
    return " ".join(parts)


def int_to_words(n: int) -> str:
    """Render a non-negative integer below 10**9 as English words."""
    if not isinstance(n, int) or isinstance(n, bool):
        raise NumberRangeError(f"expected an int, got {type(n).__name__}")
    if not 0 <= n < MAX_VALUE:
        raise NumberRangeError(f"value out of range [0, 10^9): {n}")
    if n == 0:
        return "zero"
    parts = []
    remaining = n
    for scale_word, scale in _SCALES:
        group, remaining = divmod(remaining, scale)
        if group:
            parts.append(_three_digits_to_words(group))
            parts.append(scale_word)
    if remaining:
        parts.append(_three_digits_to_words(remaining))
    return " ".join(parts)


def _parse_small(words: list[str], phrase: str) -> int:
    """Parse a 1..999 segment, enforcing canonical word order."""
    if not words:
        raise NumberParseError(f"empty number segment in {phrase!r}")
    i = 0
    total = 0
    if len(words) >= 2 and words[1] == "hundred":
        hundreds = _ONES_MAP.get(words[0], 0)
        if not 1 <= hundreds <= 9:
            raise NumberParseError(f"bad hundreds digit {words[0]!r} in {phrase!r}")
        total = hundreds * 100
        i = 2
    if i < len(words):
        w = words[i]
        if w in _TENS_MAP:
            total += _TENS_MAP[w]
            i += 1
            if i < len(words):
                ones = _ONES_MAP.get(words[i])
                if ones is None or not 1 <= ones <= 9:
                    raise NumberParseError(f"unexpected {words[i]!r} after {w!r} in {phrase!r}")
                total += ones
                i += 1
        elif w in _ONES_MAP and _ONES_MAP[w] >= 1:
            total += _ONES_MAP[w]
            i += 1
        else:
            raise NumberParseError(f"unexpected word {w!r} in {phrase!r}")
    if i != len(words):
        raise NumberParseError(f"trailing words {words[i:]!r} in {phrase!r}")
    if total == 0:
        raise NumberParseError(f"empty value in {phrase!r}")
    return total


def words_to_int(s: str, lexicon: Mapping[str, int] | None = None) -> int:
    """Parse an English number phrase; inverse of int_to_words on its image.

    Accepts lexicon synonyms ("a dozen") in addition to the plain grammar.
    Raises NumberParseError on unknown words or malformed sequences such as
    "forty ten".
    """
    if lexicon is None:
        lexicon = DEFAULT_LEXICON
    phrase = " ".join(s.lower().split())
    if not phrase:
        raise NumberParseError("empty number phrase")
    if phrase in lexicon:
        return lexicon[phrase]
    words = phrase.split()
    if "zero" in words:
        if words != ["zero"]:
            raise NumberParseError(f"'zero' cannot combine with other words: {phrase!r}")
        return 0
    for w in words:
        if w not in NUMBER_WORDS:
            raise NumberParseError(f"unknown number word {w!r} in {phrase!r}")
    total = 0
    rest = words
    for scale_word, scale in _SCALES:
        if scale_word in rest:
            idx = rest.index(scale_word)
            total += _parse_small(rest[:idx], phrase) * scale
            rest = rest[idx + 1 :]
    if rest:
        total += _parse_small(rest, phrase)
    if total >= MAX_VALUE:
        raise NumberParseError(f"value out of range [0, 10^9): {phrase!r}")
    return total


_SPAN_RE = re.compile(r"[A-Za-z]+|[0-9]+")


def _is_canonical_digits(s: str) -> bool:
    return len(s) <= 9 and (s == "0" or not s.startswith("0"))


def lex_numbers(
    text: str,
    lexicon: Mapping[str, int] | None = None,
    *,
    word_numbers: bool = True,
) -> list[NumberToken]:
    """Find maximal non-overlapping number spans, left to right.

    Digit spans and word spans are both recognized; word spans use
    greedy-longest matching ("twenty seven" wins over "twenty", "seven").
    Digit spans with leading zeros or more than 9 digits are not numbers.
    """
    if lexicon is None:
        lexicon = DEFAULT_LEXICON
    candidate_words = set(NUMBER_WORDS)
    for phrase in lexicon:
        candidate_words.update(phrase.split())

    spans = [(m.group(), m.start(), m.end()) for m in _SPAN_RE.finditer(text)]
    tokens: list[NumberToken] = []
    i = 0
    while i < len(spans):
        word, start, end = spans[i]
        if word[0].isdigit():
            if _is_canonical_digits(word):
                tokens.append(NumberToken(int(word), word, Rendering.DIGITS, start, end))
            i += 1
            continue
        if not word_numbers or word.lower() not in candidate_words:
            i += 1
            continue
        # Extend over adjacent candidate words separated by spaces only.
        j = i
        while (
            j + 1 < len(spans)
            and spans[j + 1][0][0].isalpha()
            and spans[j + 1][0].lower() in candidate_words
            and text[spans[j][2] : spans[j + 1][1]].strip() == ""
        ):
            j += 1
        matched = False
        for k in range(j, i - 1, -1):
            surface = text[start : spans[k][2]]
            try:
                value = words_to_int(surface, lexicon)
            except NumberParseError:
                continue
            tokens.append(NumberToken(value, surface, Rendering.WORDS, start, spans[k][2]))
            i = k + 1
            matched = True
            break
        if not matched:
            i += 1
    return tokens
