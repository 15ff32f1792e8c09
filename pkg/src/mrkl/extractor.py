"""Natural-language -> arithmetic argument extraction.

The reference extractor is a deterministic two-stage matcher over a
normalized token stream:

1. exact template matching — every catalog phrasing compiles to a token
   pattern with number slots, so any instantiated question (either
   rendering) maps straight back to its gold expression;
2. a recursive-descent grammar for everything else: infix chains with
   operator precedence, symbolic input ("3-1=?"), operation-word synonyms
   ("added to", "divided by"), and nested quantity nouns ("the sum of A
   and the product of B and C"). If the grammar finds two structurally
   different readings it refuses (NoParse "ambiguous") instead of guessing.

Alternative extractors plug in through a line-oriented wire protocol:

    request:   one raw utterance per line
    response:  a calculator-call string, or "NOPARSE <reason>"
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass
from typing import Mapping, Protocol, runtime_checkable

from .arithmetic import ArithExpr, Leaf, Node, Op, structurally_equal, to_calculator_call
from .numword import DEFAULT_LEXICON, NUMBER_WORDS, Rendering, lex_numbers
from .templates import Template, catalog, substitute_operands

NOPARSE_UNKNOWN_VOCAB = "unknown vocabulary"
NOPARSE_NO_MATCH = "no template match"
NOPARSE_AMBIGUOUS = "ambiguous"


@dataclass(frozen=True)
class Extraction:
    expr: ArithExpr
    confidence: float
    matched_template: str | None = None


@dataclass(frozen=True)
class NoParse:
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class Token:
    kind: str  # "word" | "num" | "sym"
    text: str
    value: int | None = None
    rendering: Rendering | None = None


_SYMBOL_MAP = {"−": "-", "–": "-", "×": "*", "÷": "/", "⁄": "/"}
_KEPT_SYMBOLS = set("+-*/()")
# Token-level fixes for two known catalog misspellings.
_WORD_FIXES = {"diffrence": "difference"}
_BIGRAM_FIXES = {("divided", "bu"): "by"}

_INFIX_WORDS: Mapping[str, Op] = {
    "plus": Op.ADD,
    "minus": Op.SUB,
    "times": Op.MUL,
    "over": Op.DIV,
    "less": Op.SUB,
}
_INFIX_BIGRAMS: Mapping[tuple[str, str], Op] = {
    ("divided", "by"): Op.DIV,
    ("multiplied", "by"): Op.MUL,
    ("added", "to"): Op.ADD,
}
_NOUN_OPS: Mapping[str, Op] = {
    "sum": Op.ADD,
    "difference": Op.SUB,
    "product": Op.MUL,
    "ratio": Op.DIV,
}

# Operation synonym table, seeded from the catalog's own vocabulary.
SYNONYMS: Mapping[str, tuple[str, ...]] = {
    "add": ("plus", "added to", "sum of"),
    "sub": ("minus", "less", "difference between"),
    "mul": ("times", "multiplied by", "product of"),
    "div": ("over", "divided by", "ratio between", "ratio of"),
}

_PREFIXES = (
    ("what", "is", "the", "result", "of"),
    ("how", "much", "is"),
    ("what", "is"),
    (),
)


def normalize(
    text: str,
    *,
    word_numbers: bool = True,
    lexicon: Mapping[str, int] | None = None,
) -> list[Token]:
    """Lowercase, strip punctuation (keeping digits and + - * / ( )), fix
    the known catalog misspellings, and merge number spans into NUM tokens."""
    if lexicon is None:
        lexicon = DEFAULT_LEXICON
    chars = []
    for ch in text:
        ch = _SYMBOL_MAP.get(ch, ch)
        if ch.isalnum():
            chars.append(ch.lower())
        elif ch in _KEPT_SYMBOLS:
            chars.append(f" {ch} ")
        else:
            chars.append(" ")
    raw = "".join(chars).split()
    words: list[str] = []
    for w in raw:
        if words and (words[-1], w) in _BIGRAM_FIXES:
            w = _BIGRAM_FIXES[(words[-1], w)]
        words.append(_WORD_FIXES.get(w, w))

    joined = " ".join(words)
    numbers = {
        t.start: t for t in lex_numbers(joined, lexicon, word_numbers=word_numbers)
    }
    offsets = []
    pos = 0
    for w in words:
        offsets.append(pos)
        pos += len(w) + 1
    tokens: list[Token] = []
    i = 0
    while i < len(words):
        start = offsets[i]
        if start in numbers:
            num = numbers[start]
            tokens.append(Token("num", num.surface, num.value, num.rendering))
            end = start + len(num.surface)
            while i < len(words) and offsets[i] < end:
                i += 1
            continue
        w = words[i]
        tokens.append(Token("sym", w) if w in _KEPT_SYMBOLS else Token("word", w))
        i += 1
    return tokens


_NUM_MARK = "\x00NUM"


def _pattern_signature(tokens: list[Token]) -> tuple[str, ...]:
    return tuple(_NUM_MARK if t.kind == "num" else t.text for t in tokens)


def _compile_template(t: Template) -> tuple[str, ...]:
    # Replace slots with a digit so normalize() lexes them as numbers.
    text = t.phrasing
    if t.arity == 1:
        text = text.replace("{x}", "7").replace("{y}", "7")
    else:
        for slot in ("A", "B", "C"):
            text = text.replace(slot, "7", 1)
    return _pattern_signature(normalize(text))


def _build_pattern_table() -> dict[tuple[str, ...], Template]:
    table: dict[tuple[str, ...], Template] = {}
    for t in catalog(1) + catalog(2):
        sig = _compile_template(t)
        if sig in table:
            raise RuntimeError(f"catalog patterns collide: {t.template_id} vs {table[sig].template_id}")
        table[sig] = t
    return table


def _build_vocabulary() -> frozenset[str]:
    vocab = set(NUMBER_WORDS)
    for phrase in DEFAULT_LEXICON:
        vocab.update(phrase.split())
    for t in catalog(1) + catalog(2):
        for part in _compile_template(t):
            if part != _NUM_MARK:
                vocab.add(part)
    vocab.update(_INFIX_WORDS)
    for bigram in _INFIX_BIGRAMS:
        vocab.update(bigram)
    vocab.update(_NOUN_OPS)
    vocab.update({"of", "between", "the", "and", "is", "result", "multiply", "by", "to"})
    return frozenset(vocab)


_PATTERNS = _build_pattern_table()
VOCABULARY = _build_vocabulary()


def _fold_chain(parts: list) -> ArithExpr:
    """Fold [expr, op, expr, op, expr...] with * and / binding tighter."""
    exprs = parts[0::2]
    ops = parts[1::2]
    # multiplication/division pass, left associative
    stack = [exprs[0]]
    pending: list[Op] = []
    for op, right in zip(ops, exprs[1:]):
        if op in (Op.MUL, Op.DIV):
            stack[-1] = Node(op, stack[-1], right)
        else:
            pending.append(op)
            stack.append(right)
    result = stack[0]
    for op, right in zip(pending, stack[1:]):
        result = Node(op, result, right)
    return result


class _Grammar:
    """Backtracking recursive descent returning every full reading."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.n = len(tokens)

    def _word(self, i: int) -> str | None:
        if i < self.n and self.tokens[i].kind == "word":
            return self.tokens[i].text
        return None

    def _infix_at(self, i: int) -> tuple[Op, int] | None:
        t = self.tokens[i] if i < self.n else None
        if t is None:
            return None
        if t.kind == "sym" and t.text in "+-*/":
            return Op(t.text), i + 1
        if t.kind == "word":
            nxt = self._word(i + 1)
            if nxt is not None and (t.text, nxt) in _INFIX_BIGRAMS:
                return _INFIX_BIGRAMS[(t.text, nxt)], i + 2
            if t.text in _INFIX_WORDS:
                return _INFIX_WORDS[t.text], i + 1
        return None

    def operand(self, i: int) -> list[tuple[ArithExpr, int]]:
        out: list[tuple[ArithExpr, int]] = []
        if i >= self.n:
            return out
        t = self.tokens[i]
        if t.kind == "num":
            out.append((Leaf(t.value), i + 1))
        if t.kind == "sym" and t.text == "(":
            for expr, j in self.expr(i + 1):
                if j < self.n and self.tokens[j].kind == "sym" and self.tokens[j].text == ")":
                    out.append((expr, j + 1))
        out.extend(self.noun_phrase(i))
        return out

    def noun_phrase(self, i: int) -> list[tuple[ArithExpr, int]]:
        j = i
        if self._word(j) == "the":
            j += 1
        noun = self._word(j)
        if noun not in _NOUN_OPS:
            return []
        if self._word(j + 1) not in ("of", "between"):
            return []
        op = _NOUN_OPS[noun]
        out = []
        start = j + 2
        for m in range(start + 1, self.n):
            if self._word(m) != "and":
                continue
            for left, consumed in self.expr(start):
                if consumed != m:
                    continue
                for right, end in self.expr(m + 1):
                    out.append((Node(op, left, right), end))
        return out

    def expr(self, i: int) -> list[tuple[ArithExpr, int]]:
        out: list[tuple[ArithExpr, int]] = []
        for first, j in self.operand(i):
            self._chain([first], j, out)
        return out

    def _chain(self, parts: list, i: int, out: list) -> None:
        out.append((_fold_chain(parts), i))
        hit = self._infix_at(i)
        if hit is None:
            return
        op, j = hit
        for operand, k in self.operand(j):
            self._chain(parts + [op, operand], k, out)

    def imperative(self, i: int) -> list[tuple[ArithExpr, int]]:
        # "sum X and Y and multiply by Z" -> (X+Y)*Z
        if self._word(i) != "sum":
            return []
        out = []
        for m in range(i + 2, self.n):
            if self._word(m) != "and":
                continue
            for left, consumed in self.expr(i + 1):
                if consumed != m:
                    continue
                for m2 in range(m + 2, self.n):
                    if (
                        self._word(m2) == "and"
                        and self._word(m2 + 1) == "multiply"
                        and self._word(m2 + 2) == "by"
                    ):
                        for mid, consumed2 in self.expr(m + 1):
                            if consumed2 != m2:
                                continue
                            for right, end in self.expr(m2 + 3):
                                out.append((Node(Op.MUL, Node(Op.ADD, left, mid), right), end))
        return out

    def all_sentence_readings(self) -> list[ArithExpr]:
        readings: list[ArithExpr] = []
        for prefix in _PREFIXES:
            k = len(prefix)
            if tuple(t.text for t in self.tokens[:k]) != prefix:
                continue
            if any(t.kind != "word" for t in self.tokens[:k]):
                continue
            candidates = self.expr(k) + self.imperative(k)
            for expr, end in candidates:
                if end == self.n or (end == self.n - 1 and self._word(end) == "is"):
                    if isinstance(expr, Node):  # a bare number is not a problem statement
                        readings.append(expr)
        # dedupe structurally, preserving order
        unique: list[ArithExpr] = []
        for r in readings:
            if not any(structurally_equal(r, u) for u in unique):
                unique.append(r)
        return unique


class ReferenceExtractor:
    """Deterministic grammar/pattern extractor over the template catalog."""

    def __init__(
        self,
        *,
        word_numbers: bool = True,
        lexicon: Mapping[str, int] | None = None,
    ):
        self.word_numbers = word_numbers
        self.lexicon = dict(DEFAULT_LEXICON if lexicon is None else lexicon)

    def extract(self, text: str) -> Extraction | NoParse:
        tokens = normalize(text, word_numbers=self.word_numbers, lexicon=self.lexicon)
        if not tokens:
            return NoParse(NOPARSE_NO_MATCH, "empty input")
        unknown = sorted({t.text for t in tokens if t.kind == "word" and t.text not in VOCABULARY})
        if unknown:
            return NoParse(NOPARSE_UNKNOWN_VOCAB, ", ".join(unknown))
        template = _PATTERNS.get(_pattern_signature(tokens))
        if template is not None:
            operands = tuple(t.value for t in tokens if t.kind == "num")
            return Extraction(
                expr=substitute_operands(template.shape, operands),
                confidence=1.0,
                matched_template=template.template_id,
            )
        readings = _Grammar(tokens).all_sentence_readings()
        if len(readings) == 1:
            return Extraction(expr=readings[0], confidence=1.0, matched_template=None)
        if len(readings) > 1:
            calls = " vs ".join(to_calculator_call(r) for r in readings[:4])
            return NoParse(NOPARSE_AMBIGUOUS, calls)
        return NoParse(NOPARSE_NO_MATCH)


_DEFAULT = ReferenceExtractor()


def extract(text: str) -> Extraction | NoParse:
    """Extract with the default reference extractor."""
    return _DEFAULT.extract(text)


class BackendTransportError(RuntimeError):
    """The extractor backend channel failed (process died, pipe closed...)."""


@runtime_checkable
class ExtractorBackend(Protocol):
    """Anything that answers utterances with calculator-call strings."""

    name: str

    def extract_call(self, text: str) -> str: ...


class ReferenceBackend:
    """Wire-protocol view of a ReferenceExtractor."""

    def __init__(self, extractor: ReferenceExtractor | None = None, name: str = "reference"):
        self.extractor = extractor or _DEFAULT
        self.name = name

    def extract_call(self, text: str) -> str:
        result = self.extractor.extract(text)
        if isinstance(result, NoParse):
            return f"NOPARSE {result.reason}"
        return to_calculator_call(result.expr)


class SubprocessBackend:
    """Runs an external extractor over the line protocol on stdin/stdout."""

    def __init__(self, command: str | list[str], name: str | None = None):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.name = name or f"cmd:{command if isinstance(command, str) else ' '.join(command)}"
        self._proc: subprocess.Popen | None = None

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self.argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise BackendTransportError(f"cannot start backend {self.argv!r}: {exc}") from exc
        return self._proc

    def extract_call(self, text: str) -> str:
        proc = self._ensure()
        try:
            assert proc.stdin is not None and proc.stdout is not None
            proc.stdin.write(text.replace("\n", " ") + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        except (OSError, ValueError) as exc:
            raise BackendTransportError(f"backend {self.name} channel failed: {exc}") from exc
        if not line:
            raise BackendTransportError(f"backend {self.name} closed its output")
        return line.strip()

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.terminate()
            self._proc.wait(timeout=5)
        self._proc = None


def get_backend(name: str) -> ExtractorBackend:
    """Resolve a backend by CLI name: "reference", "digits-only" (word
    numbers disabled), or "cmd:<command>" for an external process."""
    if name == "reference":
        return ReferenceBackend()
    if name == "digits-only":
        return ReferenceBackend(ReferenceExtractor(word_numbers=False), name="digits-only")
    if name.startswith("cmd:"):
        return SubprocessBackend(name[4:])
    raise ValueError(f"unknown backend {name!r} (try reference, digits-only, or cmd:<command>)")
