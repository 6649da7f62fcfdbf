"""Parse, fetch and evaluate a single report."""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Awaitable, Callable, Mapping
from dataclasses import asdict, dataclass, field, replace
from typing import Any

from deepcite.events import EventEmitter, EventKind
from deepcite.fetch import Fetcher, FetchPolicy, get_fetcher
from deepcite.judges import JudgeBackend, JudgeRetryPolicy, PairEvaluator, get_judge
from deepcite.models import ALL_DIMENSIONS, Attribution, AttributionDocument, Citation, Dimension, EvalResult
from deepcite.parser import parse_document

LOGGER = logging.getLogger(__name__)

Sleep = Callable[[float], Awaitable[None]]

DEFAULT_EVALUATOR_CONCURRENCY = 15
DEFAULT_AGENT_CONCURRENCY = 10
_SECRET_KEYS = frozenset({"api_key", "chat_model", "env", "responses", "transport"})


@dataclass(slots=True, frozen=True)
class RunConfig:
    """Settings for one evaluation run.

    Attributes:
        evaluator_concurrency: Bound on concurrent fetches and judge calls.
        agent_concurrency: Bound on concurrent report acquisitions.
        fetch_policy: Retry, timeout and truncation settings.
        dimensions: Dimensions to evaluate, kept in reporting order.
        judge: Judge backend selector passed to :func:`deepcite.judges.get_judge`.
        fetcher: Fetcher selector passed to :func:`deepcite.fetch.get_fetcher`.
        judge_retry: Transport and parse retry settings for judge calls.
        tool_call_budget: Agent tool-call budget for this run, if any.
        run_id: Identifier of the run directory and events.
    """

    evaluator_concurrency: int = DEFAULT_EVALUATOR_CONCURRENCY
    agent_concurrency: int = DEFAULT_AGENT_CONCURRENCY
    fetch_policy: FetchPolicy = field(default_factory=FetchPolicy)
    dimensions: tuple[Dimension, ...] = ALL_DIMENSIONS
    judge: Mapping[str, Any] = field(default_factory=lambda: {"backend": "heuristic"})
    fetcher: Mapping[str, Any] = field(default_factory=lambda: {"backend": "http"})
    judge_retry: JudgeRetryPolicy = field(default_factory=JudgeRetryPolicy)
    tool_call_budget: int | None = None
    run_id: str = "run"

    def __post_init__(self) -> None:
        if self.evaluator_concurrency < 1 or self.agent_concurrency < 1:
            msg = "Concurrency limits must be at least 1"
            raise ValueError(msg)
        if not self.dimensions:
            msg = "RunConfig.dimensions must not be empty"
            raise ValueError(msg)
        ordered = tuple(sorted(set(self.dimensions), key=lambda dimension: dimension.rank))
        object.__setattr__(self, "dimensions", ordered)
        if self.tool_call_budget is not None and self.tool_call_budget < 1:
            msg = "RunConfig.tool_call_budget must be positive"
            raise ValueError(msg)

    def to_dict(self) -> dict[str, Any]:
        """Echo of the configuration for run manifests, without secrets."""

        return {
            "run_id": self.run_id,
            "evaluator_concurrency": self.evaluator_concurrency,
            "agent_concurrency": self.agent_concurrency,
            "dimensions": [dimension.value for dimension in self.dimensions],
            "fetch_policy": asdict(self.fetch_policy),
            "judge": {key: value for key, value in self.judge.items() if key not in _SECRET_KEYS},
            "fetcher": {key: str(value) for key, value in self.fetcher.items() if key not in _SECRET_KEYS},
            "judge_retry": asdict(self.judge_retry),
            "tool_call_budget": self.tool_call_budget,
        }


class PipelineRunner:
    """Evaluate documents with shared fetcher, judge and concurrency bounds.

    Fetches and judge calls across every document handled by one runner share
    the ``evaluator_concurrency`` bound.
    """

    def __init__(
        self,
        config: RunConfig,
        *,
        fetcher: Fetcher | None = None,
        judge: JudgeBackend | None = None,
        events: EventEmitter | None = None,
        sleep: Sleep = asyncio.sleep,
    ) -> None:
        self.config = config
        self._owns_fetcher = fetcher is None
        self.fetcher = fetcher if fetcher is not None else get_fetcher({**config.fetcher, "policy": config.fetch_policy})
        self.judge = judge if judge is not None else get_judge(config.judge)
        self.events = events or EventEmitter(None, config.run_id)
        self.evaluator = PairEvaluator(self.judge, config.fetch_policy, config.judge_retry, sleep)
        self._slots = asyncio.Semaphore(config.evaluator_concurrency)

    async def aclose(self) -> None:
        if self._owns_fetcher:
            await self.fetcher.aclose()

    async def evaluate_document(self, document: AttributionDocument) -> AttributionDocument:
        """Fetch every citation once and evaluate every pair on each enabled dimension."""

        citations = await asyncio.gather(*(self._fetch(citation) for citation in document.citations))
        fetched = document.with_citations(tuple(citations))
        by_id = {citation.id: citation for citation in fetched.citations}
        jobs = [
            self._evaluate(dimension, attribution, by_id[citation.id])
            for attribution, citation in fetched.pairs()
            for dimension in self.config.dimensions
        ]
        evals: list[EvalResult] = list(await asyncio.gather(*jobs))
        return fetched.with_evals(evals)

    async def run_pipeline(self, report: str, *, origin: str = "inline") -> AttributionDocument:
        """Parse ``report`` and evaluate it."""

        document = await self.evaluate_document(parse_document(report, origin=origin))
        self.events.emit(
            EventKind.DOCUMENT_COMPLETED,
            origin=origin,
            citations=len(document.citations),
            attributions=len(document.attributions),
            evals=len(document.evals),
        )
        return document

    async def _fetch(self, citation: Citation) -> Citation:
        async with self._slots:
            outcome = await self.fetcher.fetch(citation.url)
        self.events.emit(EventKind.CITATION_FETCHED, url=citation.url, category=outcome.label, attempts=outcome.attempts)
        return replace(citation, fetch_outcome=outcome)

    async def _evaluate(self, dimension: Dimension, attribution: Attribution, citation: Citation) -> EvalResult:
        if dimension is Dimension.LINK_WORKS:
            result = await self.evaluator.evaluate(dimension, attribution, citation)
        else:
            async with self._slots:
                result = await self.evaluator.evaluate(dimension, attribution, citation)
        self.events.emit(
            EventKind.PAIR_EVALUATED,
            attribution_id=result.attribution_id,
            citation_id=result.citation_id,
            dimension=result.dimension.value,
            score=result.score,
        )
        return result


async def run_pipeline(
    report: str,
    config: RunConfig | None = None,
    *,
    fetcher: Fetcher | None = None,
    judge: JudgeBackend | None = None,
    origin: str = "inline",
    sleep: Sleep = asyncio.sleep,
) -> AttributionDocument:
    """Parse and evaluate one report with a short-lived :class:`PipelineRunner`."""

    runner = PipelineRunner(config or RunConfig(), fetcher=fetcher, judge=judge, sleep=sleep)
    try:
        return await runner.run_pipeline(report, origin=origin)
    finally:
        await runner.aclose()


__all__ = ["DEFAULT_AGENT_CONCURRENCY", "DEFAULT_EVALUATOR_CONCURRENCY", "PipelineRunner", "RunConfig", "run_pipeline"]
