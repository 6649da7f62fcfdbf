"""Fakes and builders shared across the deepcite tests."""

from __future__ import annotations

import asyncio
import base64
import json
from collections.abc import Mapping, Sequence
from pathlib import Path

from deepcite.errors import JudgeUnavailableError
from deepcite.fetch import FetchCategory, FetchOutcome
from deepcite.fetch.replay import recording_path
from deepcite.judges import JudgeVerdict, render_verdict
from deepcite.models import Attribution, AttributionDocument, Citation, Dimension, EvalFlag, EvalResult, SourceDocument


class FakeSleep:
    """Records requested delays instead of sleeping."""

    def __init__(self) -> None:
        self.delays: list[float] = []

    async def __call__(self, delay: float) -> None:
        self.delays.append(delay)


class FakeClock:
    """Monotonic clock advancing by ``step`` seconds per reading."""

    def __init__(self, start: float = 0.0, step: float = 0.0) -> None:
        self.now = start
        self.step = step

    def __call__(self) -> float:
        current = self.now
        self.now += self.step
        return current


def ok_outcome(content: str = "Source text about the claim.", *, status: int = 200, attempts: int = 1) -> FetchOutcome:
    return FetchOutcome(
        category=FetchCategory.OK,
        http_status=status,
        attempts=attempts,
        elapsed_ms=0,
        content=content,
        content_type="text/html",
    )


def failed_outcome(category: FetchCategory, status: int | None = None, *, attempts: int = 1) -> FetchOutcome:
    return FetchOutcome(category=category, http_status=status, attempts=attempts, elapsed_ms=0)


class StaticFetcher:
    """Fetcher answering from a URL -> outcome table; unknown URLs are unreachable."""

    def __init__(self, outcomes: Mapping[str, FetchOutcome] | None = None, *, delay: float = 0.0) -> None:
        self.outcomes = dict(outcomes or {})
        self.delay = delay
        self.calls: list[str] = []
        self.active = 0
        self.peak = 0
        self.closed = False

    async def fetch(self, url: str) -> FetchOutcome:
        self.calls.append(url)
        self.active += 1
        self.peak = max(self.peak, self.active)
        try:
            await asyncio.sleep(self.delay)
            return self.outcomes.get(url) or failed_outcome(FetchCategory.UNREACHABLE)
        finally:
            self.active -= 1

    async def aclose(self) -> None:
        self.closed = True


class FixedJudge:
    """Judge returning one verdict for every prompt, optionally failing first."""

    def __init__(self, score: int = 1, explanation: str = "Looks right.", *, unavailable: int = 0, delay: float = 0.0) -> None:
        self.response = render_verdict(JudgeVerdict(score, explanation))
        self.unavailable = unavailable
        self.delay = delay
        self.prompts: list[str] = []
        self.active = 0
        self.peak = 0

    async def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        self.active += 1
        self.peak = max(self.peak, self.active)
        try:
            await asyncio.sleep(self.delay)
            if self.unavailable:
                self.unavailable -= 1
                msg = "connection refused"
                raise JudgeUnavailableError(msg)
            return self.response
        finally:
            self.active -= 1


class SequenceJudge:
    """Judge replaying raw completions in order; the last one repeats."""

    def __init__(self, responses: Sequence[str]) -> None:
        self.responses = list(responses)
        self.prompts: list[str] = []

    async def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        index = min(len(self.prompts), len(self.responses)) - 1
        return self.responses[index]


def citation(citation_id: int, *, outcome: FetchOutcome | None = None, url: str | None = None) -> Citation:
    return Citation(
        id=citation_id,
        url=url or f"https://example.com/source-{citation_id}",
        raw_labels=(str(citation_id),),
        fetch_outcome=outcome,
    )


def attribution(attribution_id: int, citation_ids: Sequence[int], text: str = "Claim text.") -> Attribution:
    return Attribution(
        id=attribution_id,
        text_nocite=text,
        span=(0, len(text)),
        citation_ids=tuple(citation_ids),
        passage_id=1,
    )


def make_document(claims: Sequence[Sequence[int]], *, n_citations: int | None = None) -> AttributionDocument:
    """Document whose attribution ``i + 1`` cites ``claims[i]``."""

    highest = max((max(ids) for ids in claims if ids), default=0)
    count = n_citations if n_citations is not None else highest
    return AttributionDocument(
        source=SourceDocument(raw_text="", canonical_text=""),
        citations=tuple(citation(index) for index in range(1, count + 1)),
        attributions=tuple(attribution(index, ids) for index, ids in enumerate(claims, start=1) if ids),
    )


def make_eval(
    dimension: Dimension,
    score: int | None,
    *,
    attribution_id: int = 1,
    citation_id: int = 1,
    flags: Sequence[EvalFlag] = (),
    fetch_category: str | None = None,
) -> EvalResult:
    if fetch_category is None and dimension is Dimension.LINK_WORKS:
        fetch_category = "ok"
    return EvalResult(
        attribution_id=attribution_id,
        citation_id=citation_id,
        dimension=dimension,
        score=score,
        flags=frozenset(flags),
        fetch_category=fetch_category,
    )


def write_recording(
    directory: Path,
    url: str,
    *,
    status: int = 200,
    body: str = "",
    content_type: str = "text/html; charset=utf-8",
    error: str | None = None,
) -> None:
    """Store a replayable exchange for ``url`` the way the recording transport does."""

    payload: dict[str, object] = {"url": url}
    if error is not None:
        payload["error"] = error
    else:
        payload.update(
            {
                "status": status,
                "headers": [["content-type", content_type]],
                "body": base64.b64encode(body.encode("utf-8")).decode("ascii"),
            }
        )
    path = recording_path(Path(directory), url)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
