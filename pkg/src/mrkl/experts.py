"""Expert modules: calculator, date, currency, database lookup, and the
never-declining fallback.

Symbolic experts answer with confidence 1.0 when their pattern matches and
Decline otherwise, and every response carries a rationale naming the module
and its inputs. Resources (clock, exchange rates, record store) are injected
at construction, never read from the environment.

Resource file formats (line-oriented JSON, versioned by a header line):

    rates:    {"schema": "mrkl-rates", "version": 1, "timestamp": "..."}
              {"pair": "USD/MAD", "rate": "10.0"}
    records:  {"schema": "mrkl-records", "version": 1, "store": "clients"}
              {"key": "acme", "record": {...}}

The fallback's completion backend speaks the same one-line-in, one-line-out
protocol as extractor backends, except the response is free text.
"""

from __future__ import annotations

import abc
import json
import re
import shlex
import subprocess
from dataclasses import dataclass
from datetime import date
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Union

from .arithmetic import EvaluationError, evaluate, format_exact, to_calculator_call
from .extractor import BackendTransportError, NoParse, ReferenceExtractor
from .extractor import extract as default_extract


@dataclass(frozen=True)
class ExpertDescriptor:
    name: str
    kind: str  # "symbolic" | "neural-proxy"
    description: str


@dataclass(frozen=True)
class ExpertResponse:
    answer_text: str
    payload: object
    confidence: float
    rationale: str


@dataclass(frozen=True)
class Decline:
    reason: str = ""


HandleResult = Union[ExpertResponse, Decline]


class Expert(abc.ABC):
    name: str = ""
    kind: str = "symbolic"
    description: str = ""

    @property
    def descriptor(self) -> ExpertDescriptor:
        return ExpertDescriptor(self.name, self.kind, self.description)

    @abc.abstractmethod
    def handle(self, text: str) -> HandleResult: ...


def _squash(text: str) -> str:
    """Lowercase and drop punctuation for pattern membership tests.
    Apostrophes vanish ("today's" -> "todays"); other punctuation splits."""
    text = re.sub(r"[’']", "", text.lower())
    return " ".join(re.sub(r"[^a-z0-9 ]", " ", text).split())


class CalculatorExpert(Expert):
    name = "calculator"
    description = "extracts an arithmetic expression and evaluates it exactly"

    def __init__(self, extractor: ReferenceExtractor | None = None):
        self._extract = extractor.extract if extractor else default_extract

    def handle(self, text: str) -> HandleResult:
        result = self._extract(text)
        if isinstance(result, NoParse):
            return Decline(result.reason)
        call = to_calculator_call(result.expr)
        try:
            value = evaluate(result.expr)
        except EvaluationError as exc:
            return ExpertResponse(
                answer_text=f"undefined: {exc}",
                payload=None,
                confidence=result.confidence,
                rationale=f"calculator: {call} has no value ({exc})",
            )
        return ExpertResponse(
            answer_text=format_exact(value),
            payload=value,
            confidence=result.confidence,
            rationale=f"calculator: {call} = {format_exact(value)}",
        )


class DateExpert(Expert):
    name = "date"
    description = "answers date questions from an injected clock"

    _PATTERNS = frozenset(
        {
            "what is todays date",
            "whats todays date",
            "todays date",
            "what is the date",
            "what is the date today",
            "what is the current date",
        }
    )

    def __init__(self, clock: Callable[[], date] | date):
        self._clock = (lambda: clock) if isinstance(clock, date) else clock

    def handle(self, text: str) -> HandleResult:
        if _squash(text) not in self._PATTERNS:
            return Decline("no date pattern")
        today = self._clock().isoformat()
        return ExpertResponse(
            answer_text=today,
            payload=self._clock(),
            confidence=1.0,
            rationale=f"date: injected clock reports {today}",
        )


@dataclass(frozen=True)
class RateTable:
    rates: Mapping[tuple[str, str], Fraction]
    timestamp: str = "unknown"

    @classmethod
    def empty(cls) -> "RateTable":
        return cls(rates={})

    @classmethod
    def load(cls, path: str | Path) -> "RateTable":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines:
            raise ValueError(f"empty rates file: {path}")
        header = json.loads(lines[0])
        if header.get("schema") != "mrkl-rates":
            raise ValueError(f"not a rates file: {path}")
        rates: dict[tuple[str, str], Fraction] = {}
        for line in lines[1:]:
            if not line.strip():
                continue
            record = json.loads(line)
            src, dst = record["pair"].upper().split("/")
            rates[(src, dst)] = Fraction(record["rate"])
        return cls(rates=rates, timestamp=header.get("timestamp", "unknown"))


class CurrencyExpert(Expert):
    name = "currency"
    description = "converts amounts between currencies from a loaded rate table"

    _PATTERN = re.compile(
        r"^\s*convert\s+(\d+(?:\.\d+)?)\s+([a-zA-Z]{3})\s+(?:to|into)\s+([a-zA-Z]{3})\s*[?.!]?\s*$",
        re.IGNORECASE,
    )

    def __init__(self, rates: RateTable):
        self.rates = rates

    def handle(self, text: str) -> HandleResult:
        m = self._PATTERN.match(text)
        if not m:
            return Decline("no conversion pattern")
        amount = Fraction(m.group(1))
        src, dst = m.group(2).upper(), m.group(3).upper()
        rate = self.rates.rates.get((src, dst))
        if rate is None:
            return Decline(f"unknown pair {src}/{dst}")
        value = amount * rate
        return ExpertResponse(
            answer_text=f"{format_exact(value)} {dst}",
            payload=value,
            confidence=1.0,
            rationale=(
                f"currency: {src}->{dst} rate {format_exact(rate)}"
                f" (as of {self.rates.timestamp}); {format_exact(amount)} {src}"
                f" = {format_exact(value)} {dst}"
            ),
        )


@dataclass(frozen=True)
class RecordStore:
    name: str
    records: Mapping[str, dict]

    @classmethod
    def empty(cls, name: str = "records") -> "RecordStore":
        return cls(name=name, records={})

    @classmethod
    def load(cls, path: str | Path) -> "RecordStore":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines:
            raise ValueError(f"empty records file: {path}")
        header = json.loads(lines[0])
        if header.get("schema") != "mrkl-records":
            raise ValueError(f"not a records file: {path}")
        records = {}
        for line in lines[1:]:
            if not line.strip():
                continue
            record = json.loads(line)
            records[record["key"].lower()] = record["record"]
        return cls(name=header.get("store", "records"), records=records)


class DatabaseExpert(Expert):
    name = "database"
    description = "looks records up by key in a loaded store"

    _PATTERN = re.compile(r"^\s*(?:look\s+up|lookup|find)\s+(.+?)\s*[?.!]?\s*$", re.IGNORECASE)

    def __init__(self, store: RecordStore):
        self.store = store

    def handle(self, text: str) -> HandleResult:
        m = self._PATTERN.match(text)
        if not m:
            return Decline("no lookup pattern")
        key = m.group(1).strip().lower()
        record = self.store.records.get(key)
        rationale = f"database: store {self.store.name !r}, key {key!r}"
        if record is None:
            return ExpertResponse(
                answer_text=f"no record found for {key!r}",
                payload=None,
                confidence=1.0,
                rationale=rationale,
            )
        return ExpertResponse(
            answer_text=json.dumps(record, sort_keys=True),
            payload=record,
            confidence=1.0,
            rationale=rationale,
        )


class CompletionBackend(abc.ABC):
    name: str = ""

    @abc.abstractmethod
    def complete(self, text: str) -> str: ...


class StubCompletionBackend(CompletionBackend):
    """Deterministic stand-in for a language model."""

    name = "stub"

    def complete(self, text: str) -> str:
        return "unhandled by symbolic experts"


class EchoCompletionBackend(CompletionBackend):
    name = "echo"

    def complete(self, text: str) -> str:
        return text


class SubprocessCompletionBackend(CompletionBackend):
    """One-line-in, one-line-out completion over a child process."""

    def __init__(self, command: str, name: str | None = None):
        self.command = command
        self.name = name or f"cmd:{command}"
        self._proc: subprocess.Popen | None = None

    def complete(self, text: str) -> str:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    shlex.split(self.command),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise BackendTransportError(f"cannot start backend {self.command!r}: {exc}") from exc
        try:
            assert self._proc.stdin is not None and self._proc.stdout is not None
            self._proc.stdin.write(text.replace("\n", " ") + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (OSError, ValueError) as exc:
            raise BackendTransportError(f"backend {self.name} channel failed: {exc}") from exc
        if not line:
            raise BackendTransportError(f"backend {self.name} closed its output")
        return line.rstrip("\n")


class FallbackExpert(Expert):
    name = "fallback"
    kind = "neural-proxy"
    description = "delegates unmatched inputs to a completion backend"

    def __init__(self, backend: CompletionBackend | None = None):
        self.backend = backend or StubCompletionBackend()

    def handle(self, text: str) -> ExpertResponse:
        try:
            completion = self.backend.complete(text)
        except BackendTransportError as exc:
            return ExpertResponse(
                answer_text=f"fallback backend error: {exc}",
                payload=None,
                confidence=0.0,
                rationale=f"fallback: backend {self.backend.name!r} transport failure",
            )
        return ExpertResponse(
            answer_text=completion,
            payload=completion,
            confidence=0.0,
            rationale=f"fallback: completion from backend {self.backend.name!r}",
        )


def default_experts(
    *,
    clock: Callable[[], date] | date | None = None,
    rates: RateTable | None = None,
    records: RecordStore | None = None,
    fallback_backend: CompletionBackend | None = None,
    extractor: ReferenceExtractor | None = None,
) -> tuple[list[Expert], FallbackExpert]:
    """The standard registry: four symbolic experts plus the fallback."""
    experts: list[Expert] = [
        CalculatorExpert(extractor),
        DateExpert(clock if clock is not None else date.today),
        CurrencyExpert(rates if rates is not None else RateTable.empty()),
        DatabaseExpert(records if records is not None else RecordStore.empty()),
    ]
    return experts, FallbackExpert(fallback_backend)
