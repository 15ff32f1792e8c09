"""Confidence-threshold dispatch over the expert registry.

Every route call queries every registered expert, keeps the full score map
for auditing, picks the highest confidence at or above the threshold
(registration order breaks ties), and falls back to the designated
fallback expert when nothing clears the bar. An expert that raises is
scored 0 and the error recorded in the decision; routing itself never
fails.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .experts import Decline, Expert, ExpertResponse, FallbackExpert

DEFAULT_THRESHOLD = 0.5


class RegistrationError(ValueError):
    """Duplicate expert name."""


@dataclass(frozen=True)
class RoutingDecision:
    text: str
    scores: dict[str, float]
    chosen: str
    used_fallback: bool
    response: ExpertResponse
    errors: dict[str, str] = field(default_factory=dict)
    declined: dict[str, str] = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "input": self.text,
            "scores": self.scores,
            "chosen": self.chosen,
            "used_fallback": self.used_fallback,
            "answer": self.response.answer_text,
            "rationale": self.response.rationale,
            "errors": self.errors,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


class Router:
    def __init__(self, fallback: FallbackExpert, threshold: float = DEFAULT_THRESHOLD):
        if not 0.0 <= threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1]: {threshold}")
        self.threshold = threshold
        self.fallback = fallback
        self._experts: list[Expert] = []
        self._names = {fallback.name}

    def register(self, expert: Expert) -> "Router":
        if expert.name in self._names:
            raise RegistrationError(f"expert name already registered: {expert.name!r}")
        self._names.add(expert.name)
        self._experts.append(expert)
        return self

    @property
    def experts(self) -> tuple[Expert, ...]:
        """All experts in query order; the fallback is always last."""
        return (*self._experts, self.fallback)

    def route(self, text: str) -> RoutingDecision:
        scores: dict[str, float] = {}
        errors: dict[str, str] = {}
        declined: dict[str, str] = {}
        responses: dict[str, ExpertResponse] = {}
        for expert in self.experts:
            try:
                result = expert.handle(text)
            except Exception as exc:  # a broken expert must not abort routing
                scores[expert.name] = 0.0
                errors[expert.name] = f"{type(exc).__name__}: {exc}"
                continue
            if isinstance(result, Decline):
                scores[expert.name] = 0.0
                declined[expert.name] = result.reason
            else:
                scores[expert.name] = result.confidence
                responses[expert.name] = result

        chosen: str | None = None
        best = 0.0
        for expert in self.experts:
            name = expert.name
            if name not in responses or scores[name] < self.threshold:
                continue
            if chosen is None or scores[name] > best:  # ties keep the earlier registrant
                chosen, best = name, scores[name]
        used_fallback = chosen is None
        if used_fallback:
            chosen = self.fallback.name
            response = responses.get(chosen)
            if response is None:  # fallback itself errored; synthesize an answer
                response = ExpertResponse(
                    answer_text=f"fallback error: {errors.get(chosen, 'unavailable')}",
                    payload=None,
                    confidence=0.0,
                    rationale="router: fallback expert failed",
                )
        else:
            response = responses[chosen]
        return RoutingDecision(
            text=text,
            scores=scores,
            chosen=chosen,
            used_fallback=used_fallback,
            response=response,
            errors=errors,
            declined=declined,
        )


def build_router(
    experts: list[Expert],
    fallback: FallbackExpert,
    threshold: float = DEFAULT_THRESHOLD,
) -> Router:
    router = Router(fallback, threshold)
    for expert in experts:
        router.register(expert)
    return router
