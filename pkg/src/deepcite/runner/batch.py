"""Batch runs over many queries and the search-depth ablation."""

from __future__ import annotations

import asyncio
import logging
import time
from collections.abc import Awaitable, Callable, Sequence
from dataclasses import dataclass, replace

from deepcite.errors import ReportNotFoundError, ReportSourceError
from deepcite.events import EventEmitter, EventKind, EventSink
from deepcite.fetch import Fetcher
from deepcite.judges import JudgeBackend
from deepcite.models import AttributionDocument
from deepcite.parser import parse_document
from deepcite.runner.pipeline import PipelineRunner, RunConfig
from deepcite.runner.sources import ReportSource, RunSpec

LOGGER = logging.getLogger(__name__)

Sleep = Callable[[float], Awaitable[None]]
Clock = Callable[[], float]

DEFAULT_BUDGETS: tuple[int, ...] = (2, 10, 30, 50, 70, 100, 150)


@dataclass(slots=True, frozen=True)
class RunRecord:
    """Outcome of one query in a batch.

    ``success`` is true exactly when the document has at least one
    citation-claim pair; acquisition failures carry an empty document and the
    error message.
    """

    query_id: str
    query: str
    document: AttributionDocument
    report_path: str | None = None
    budget: int | None = None
    error: str | None = None
    acquisition_attempts: int = 0
    acquisition_ms: int = 0
    evaluation_ms: int = 0

    @property
    def success(self) -> bool:
        return self.document.has_pairs


async def run_batch(
    specs: Sequence[RunSpec],
    config: RunConfig,
    *,
    source: ReportSource,
    fetcher: Fetcher | None = None,
    judge: JudgeBackend | None = None,
    sink: EventSink | None = None,
    sleep: Sleep = asyncio.sleep,
    clock: Clock = time.monotonic,
) -> list[RunRecord]:
    """Acquire, parse and evaluate every spec; records come back in spec order.

    At most ``config.agent_concurrency`` acquisitions run at once.  A report
    source failure is retried under ``config.fetch_policy`` and, when retries
    run out, becomes an unsuccessful record instead of failing the batch.

    Raises:
        ValueError: If ``specs`` is empty.
    """

    if not specs:
        msg = "run_batch needs at least one run spec"
        raise ValueError(msg)
    events = EventEmitter(sink, config.run_id)
    runner = PipelineRunner(config, fetcher=fetcher, judge=judge, events=events, sleep=sleep)
    acquisitions = asyncio.Semaphore(config.agent_concurrency)

    async def _run(spec: RunSpec) -> RunRecord:
        started = clock()
        async with acquisitions:
            report, attempts, error = await _acquire(source, spec, config, sleep)
        acquired = clock()
        origin = str(spec.report_path) if spec.report_path is not None else spec.query_id
        if report is None:
            document = parse_document("", origin=origin)
        else:
            document = await runner.run_pipeline(report, origin=origin)
        finished = clock()
        return RunRecord(
            query_id=spec.query_id,
            query=spec.query,
            document=document,
            report_path=str(spec.report_path) if spec.report_path is not None else None,
            budget=config.tool_call_budget,
            error=error,
            acquisition_attempts=attempts,
            acquisition_ms=int((acquired - started) * 1000),
            evaluation_ms=int((finished - acquired) * 1000),
        )

    tasks = [asyncio.create_task(_run(spec)) for spec in specs]
    try:
        records = list(await asyncio.gather(*tasks))
    finally:
        # In-flight work settles before the shared fetcher closes.
        for task in tasks:
            task.cancel()
        await asyncio.gather(*tasks, return_exceptions=True)
        await runner.aclose()
    events.emit(
        EventKind.BATCH_COMPLETED,
        records=len(records),
        successes=sum(record.success for record in records),
        budget=config.tool_call_budget,
    )
    return records


async def _acquire(source: ReportSource, spec: RunSpec, config: RunConfig, sleep: Sleep) -> tuple[str | None, int, str | None]:
    policy = config.fetch_policy
    attempts = 0
    while True:
        attempts += 1
        try:
            return await source.acquire(spec, config.tool_call_budget), attempts, None
        except ReportNotFoundError as exc:
            LOGGER.warning("No report for %s: %s", spec.query_id, exc)
            return None, attempts, str(exc)
        except ReportSourceError as exc:
            if attempts >= policy.max_attempts:
                LOGGER.warning("Report generation for %s failed after %s attempts: %s", spec.query_id, attempts, exc)
                return None, attempts, str(exc)
            LOGGER.warning("Report attempt %s/%s for %s failed: %s", attempts, policy.max_attempts, spec.query_id, exc)
            await sleep(policy.retry_delay_ms / 1000)


async def run_ablation(
    specs: Sequence[RunSpec],
    budgets: Sequence[int],
    config: RunConfig,
    *,
    source: ReportSource,
    fetcher: Fetcher | None = None,
    judge: JudgeBackend | None = None,
    sink: EventSink | None = None,
    sleep: Sleep = asyncio.sleep,
    clock: Clock = time.monotonic,
) -> dict[int, list[RunRecord]]:
    """Run the full batch once per tool-call budget, one budget at a time.

    Budgets are deduplicated and processed in ascending order; each batch runs
    under ``<run_id>-b<budget>``.
    """

    ordered = sorted(set(budgets))
    if not ordered:
        msg = "run_ablation needs at least one budget"
        raise ValueError(msg)
    results: dict[int, list[RunRecord]] = {}
    for budget in ordered:
        budget_config = replace(config, tool_call_budget=budget, run_id=f"{config.run_id}-b{budget}")
        LOGGER.info("Running ablation budget %s over %s queries", budget, len(specs))
        results[budget] = await run_batch(
            specs,
            budget_config,
            source=source,
            fetcher=fetcher,
            judge=judge,
            sink=sink,
            sleep=sleep,
            clock=clock,
        )
    return results


__all__ = ["DEFAULT_BUDGETS", "RunRecord", "run_ablation", "run_batch"]
