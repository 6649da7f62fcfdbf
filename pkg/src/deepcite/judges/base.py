"""Judge contract, verdict grammar and retry settings."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from deepcite.errors import JudgeOutputError

_SCORE_LINE = re.compile(r"^\s*score\s*:\s*(?P<score>.*?)\s*$", re.IGNORECASE)
_EXPLANATION_LINE = re.compile(r"^\s*explanation\s*:(?P<text>.*)$", re.IGNORECASE)


@dataclass(slots=True, frozen=True)
class JudgeVerdict:
    """Binary verdict with the judge's explanation."""

    score: int
    explanation: str

    def __post_init__(self) -> None:
        if self.score not in (0, 1):
            msg = f"JudgeVerdict.score must be 0 or 1, got {self.score!r}"
            raise ValueError(msg)
        if not self.explanation.strip():
            msg = "JudgeVerdict.explanation must not be empty"
            raise ValueError(msg)


@dataclass(slots=True, frozen=True)
class JudgeRetryPolicy:
    """How often a judge call is repeated.

    Attributes:
        max_retries: Retries after a transport failure.
        retry_delay_ms: Delay between transport retries.
        parse_retries: Extra calls, with the grammar reminder appended, after
            output that does not follow the verdict grammar.
    """

    max_retries: int = 5
    retry_delay_ms: int = 5000
    parse_retries: int = 3

    def __post_init__(self) -> None:
        if self.max_retries < 0 or self.parse_retries < 0:
            msg = "JudgeRetryPolicy retry counts must not be negative"
            raise ValueError(msg)
        if self.retry_delay_ms <= 0:
            msg = "JudgeRetryPolicy.retry_delay_ms must be positive"
            raise ValueError(msg)


@runtime_checkable
class JudgeBackend(Protocol):
    """Answers a rubric prompt with raw completion text.

    Backends may be called concurrently by the runner; implementations that
    cannot handle that must serialize internally.
    """

    async def complete(self, prompt: str) -> str:
        """Return the completion for ``prompt``."""


def parse_judge_output(raw: str) -> JudgeVerdict:
    """Parse ``SCORE: <0|1>`` / ``EXPLANATION: ...`` judge output.

    The score must sit on the first non-blank line; the next non-blank line
    starts the explanation, which runs to the end of the text.

    Raises:
        JudgeOutputError: When the text does not follow the grammar.
    """

    lines = raw.splitlines()
    index = next((position for position, line in enumerate(lines) if line.strip()), None)
    if index is None:
        msg = "Judge output is empty"
        raise JudgeOutputError(msg)
    score_match = _SCORE_LINE.match(lines[index])
    if score_match is None:
        msg = f"Judge output does not start with a SCORE line: {lines[index][:80]!r}"
        raise JudgeOutputError(msg)
    score = score_match.group("score")
    if score not in {"0", "1"}:
        msg = f"Judge score {score!r} is not 0 or 1"
        raise JudgeOutputError(msg)
    rest = list(lines[index + 1 :])
    while rest and not rest[0].strip():
        rest.pop(0)
    explanation_match = _EXPLANATION_LINE.match(rest[0]) if rest else None
    if explanation_match is None:
        msg = "Judge output is missing the EXPLANATION line"
        raise JudgeOutputError(msg)
    explanation = "\n".join([explanation_match.group("text"), *rest[1:]]).strip()
    if not explanation:
        msg = "Judge explanation is empty"
        raise JudgeOutputError(msg)
    return JudgeVerdict(score=int(score), explanation=explanation)


def render_verdict(verdict: JudgeVerdict) -> str:
    """Render ``verdict`` in the grammar accepted by :func:`parse_judge_output`."""

    return f"SCORE: {verdict.score}\nEXPLANATION: {verdict.explanation.strip()}"


__all__ = ["JudgeBackend", "JudgeRetryPolicy", "JudgeVerdict", "parse_judge_output", "render_verdict"]
