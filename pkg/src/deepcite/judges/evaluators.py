"""Per-dimension evaluation of citation-claim pairs."""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Awaitable, Callable
from dataclasses import dataclass, field

from deepcite.errors import JudgeOutputError, JudgeUnavailableError
from deepcite.fetch.base import FetchCategory, FetchPolicy, truncate
from deepcite.judges.base import JudgeBackend, JudgeRetryPolicy, parse_judge_output
from deepcite.judges.prompts import build_factcheck_prompt, build_relevance_prompt, with_grammar_reminder
from deepcite.models import Attribution, Citation, Dimension, EvalFlag, EvalResult

LOGGER = logging.getLogger(__name__)

Sleep = Callable[[float], Awaitable[None]]


class _JudgeGaveUpError(Exception):
    def __init__(self, cause: BaseException, attempts: int) -> None:
        super().__init__(str(cause) or type(cause).__name__)
        self.attempts = attempts


def _fetch_flags(citation: Citation) -> frozenset[EvalFlag]:
    outcome = citation.fetch_outcome
    if outcome is not None and outcome.category is FetchCategory.RATE_LIMITED:
        return frozenset({EvalFlag.RATE_LIMITED_SOURCE})
    return frozenset()


def eval_link_works(attribution: Attribution, citation: Citation) -> EvalResult:
    """Score 1 when the citation's fetch returned non-empty content.

    Raises:
        ValueError: If the citation has not been fetched.
    """

    outcome = citation.fetch_outcome
    if outcome is None:
        msg = f"Citation {citation.id} has not been fetched"
        raise ValueError(msg)
    return EvalResult(
        attribution_id=attribution.id,
        citation_id=citation.id,
        dimension=Dimension.LINK_WORKS,
        score=1 if outcome.accessible else 0,
        flags=_fetch_flags(citation),
        fetch_category=outcome.label,
    )


@dataclass(slots=True, frozen=True)
class PairEvaluator:
    """Judge-backed evaluator for the relevance and fact-check dimensions.

    Instances are immutable and may evaluate many pairs concurrently.

    Args:
        backend: Judge answering the rubric prompts.
        policy: Fetch policy supplying the truncation limits.
        retry: Transport and parse retry settings.
        sleep: Awaitable sleep used between transport retries.
    """

    backend: JudgeBackend
    policy: FetchPolicy = field(default_factory=FetchPolicy)
    retry: JudgeRetryPolicy = field(default_factory=JudgeRetryPolicy)
    sleep: Sleep = asyncio.sleep

    async def evaluate(self, dimension: Dimension, attribution: Attribution, citation: Citation) -> EvalResult:
        if dimension is Dimension.LINK_WORKS:
            return eval_link_works(attribution, citation)
        if dimension is Dimension.RELEVANT_CONTENT:
            return await self.relevant_content(attribution, citation)
        return await self.fact_check(attribution, citation)

    async def relevant_content(self, attribution: Attribution, citation: Citation) -> EvalResult:
        skipped = self._skip_unfetched(Dimension.RELEVANT_CONTENT, attribution, citation)
        if skipped is not None:
            return skipped
        content = truncate(citation.url_content or "", self.policy.truncation_limit)
        prompt = build_relevance_prompt(attribution.text_nocite, content)
        return await self._judge(Dimension.RELEVANT_CONTENT, prompt, attribution, citation)

    async def fact_check(self, attribution: Attribution, citation: Citation) -> EvalResult:
        skipped = self._skip_unfetched(Dimension.FACT_CHECK, attribution, citation)
        if skipped is not None:
            return skipped
        content = truncate(citation.url_content or "", self.policy.fact_check_limit)
        prompt = build_factcheck_prompt(attribution.text_nocite, content)
        return await self._judge(Dimension.FACT_CHECK, prompt, attribution, citation)

    def _skip_unfetched(self, dimension: Dimension, attribution: Attribution, citation: Citation) -> EvalResult | None:
        outcome = citation.fetch_outcome
        if outcome is not None and outcome.category is FetchCategory.OK:
            if attribution.text_nocite.strip():
                return None
            return self._not_evaluated(dimension, attribution, citation, frozenset(), "claim text is empty", 0)
        label = outcome.label if outcome is not None else "not fetched"
        flags = frozenset({EvalFlag.FETCH_FAILED}) | _fetch_flags(citation)
        return self._not_evaluated(dimension, attribution, citation, flags, f"source fetch failed: {label}", 0)

    async def _judge(self, dimension: Dimension, prompt: str, attribution: Attribution, citation: Citation) -> EvalResult:
        calls = 0
        parse_failures = 0
        current = prompt
        while True:
            try:
                raw, used = await self._complete(current)
            except _JudgeGaveUpError as exc:
                calls += exc.attempts
                LOGGER.warning("Judge unavailable for pair (%s, %s) %s: %s", attribution.id, citation.id, dimension.value, exc)
                flags = frozenset({EvalFlag.JUDGE_UNAVAILABLE})
                if parse_failures:
                    flags |= {EvalFlag.JUDGE_PARSE_RETRY}
                return self._not_evaluated(dimension, attribution, citation, flags, f"judge unavailable: {exc}", calls)
            calls += used
            try:
                verdict = parse_judge_output(raw)
            except JudgeOutputError as exc:
                parse_failures += 1
                if parse_failures > self.retry.parse_retries:
                    LOGGER.warning("Judge output for pair (%s, %s) %s never parsed: %s", attribution.id, citation.id, dimension.value, exc)
                    flags = frozenset({EvalFlag.JUDGE_PARSE_RETRY})
                    return self._not_evaluated(dimension, attribution, citation, flags, f"unparsable judge output: {exc}", calls)
                LOGGER.info("Retrying judge call for pair (%s, %s) after unparsable output", attribution.id, citation.id)
                current = with_grammar_reminder(prompt)
                continue
            return EvalResult(
                attribution_id=attribution.id,
                citation_id=citation.id,
                dimension=dimension,
                score=verdict.score,
                explanation=verdict.explanation,
                judge_attempts=calls,
                flags=frozenset({EvalFlag.JUDGE_PARSE_RETRY}) if parse_failures else frozenset(),
                fetch_category=citation.fetch_outcome.label if citation.fetch_outcome else None,
            )

    async def _complete(self, prompt: str) -> tuple[str, int]:
        """Call the backend, retrying transport failures; returns text and call count."""

        attempts = 0
        max_attempts = 1 + self.retry.max_retries
        while True:
            attempts += 1
            try:
                return await self.backend.complete(prompt), attempts
            except JudgeUnavailableError as exc:
                if attempts >= max_attempts:
                    raise _JudgeGaveUpError(exc, attempts) from exc
                LOGGER.warning("Judge attempt %s/%s failed: %s", attempts, max_attempts, exc)
                await self.sleep(self.retry.retry_delay_ms / 1000)
            except Exception as exc:
                raise _JudgeGaveUpError(exc, attempts) from exc

    @staticmethod
    def _not_evaluated(
        dimension: Dimension,
        attribution: Attribution,
        citation: Citation,
        flags: frozenset[EvalFlag],
        reason: str,
        calls: int,
    ) -> EvalResult:
        return EvalResult(
            attribution_id=attribution.id,
            citation_id=citation.id,
            dimension=dimension,
            score=None,
            explanation=reason,
            judge_attempts=calls,
            flags=flags,
            fetch_category=citation.fetch_outcome.label if citation.fetch_outcome else None,
        )


async def eval_relevant_content(
    attribution: Attribution,
    citation: Citation,
    backend: JudgeBackend,
    *,
    policy: FetchPolicy | None = None,
    retry: JudgeRetryPolicy | None = None,
    sleep: Sleep = asyncio.sleep,
) -> EvalResult:
    """Evaluate topical relevance of one pair with ``backend``."""

    evaluator = PairEvaluator(backend, policy or FetchPolicy(), retry or JudgeRetryPolicy(), sleep)
    return await evaluator.relevant_content(attribution, citation)


async def eval_fact_check(
    attribution: Attribution,
    citation: Citation,
    backend: JudgeBackend,
    *,
    policy: FetchPolicy | None = None,
    retry: JudgeRetryPolicy | None = None,
    sleep: Sleep = asyncio.sleep,
) -> EvalResult:
    """Evaluate factual support of one pair with ``backend``."""

    evaluator = PairEvaluator(backend, policy or FetchPolicy(), retry or JudgeRetryPolicy(), sleep)
    return await evaluator.fact_check(attribution, citation)


__all__ = ["PairEvaluator", "eval_fact_check", "eval_link_works", "eval_relevant_content"]
