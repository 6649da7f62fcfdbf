"""HTTP fetcher with bounded retries and outcome classification."""

from __future__ import annotations

import asyncio
import logging
import time
from collections.abc import Awaitable, Callable
from types import TracebackType

import httpx

from deepcite.fetch.base import (
    FetchCategory,
    FetchOutcome,
    FetchPolicy,
    TransportFailure,
    classify,
    is_transient,
)
from deepcite.fetch.extract import extract_text

LOGGER = logging.getLogger(__name__)

Sleep = Callable[[float], Awaitable[None]]
Clock = Callable[[], float]


class HttpFetcher:
    """Fetch cited URLs over HTTP/1.1 or HTTP/2.

    Attempts are capped at ``1 + policy.max_retries`` and each attempt, body
    included, must finish within ``policy.timeout_ms``.  Timeouts, connection
    failures, 429 and 5xx responses are retried after ``policy.retry_delay_ms``;
    every other status is final on first sight.  There is no delay after the
    last attempt.

    Args:
        policy: Retry, timeout and redirect settings.
        transport: Optional httpx transport, used by tests and the replay cache.
        sleep: Awaitable sleep used between attempts.
        clock: Monotonic clock in seconds used for ``elapsed_ms``.
    """

    def __init__(
        self,
        policy: FetchPolicy | None = None,
        *,
        transport: httpx.AsyncBaseTransport | None = None,
        sleep: Sleep = asyncio.sleep,
        clock: Clock = time.monotonic,
    ) -> None:
        self.policy = policy or FetchPolicy()
        self._sleep = sleep
        self._clock = clock
        self._client = httpx.AsyncClient(
            http2=True,
            transport=transport,
            follow_redirects=True,
            max_redirects=self.policy.max_redirects,
            timeout=httpx.Timeout(self.policy.timeout_ms / 1000),
            headers={"User-Agent": self.policy.user_agent},
        )

    async def __aenter__(self) -> HttpFetcher:
        return self

    async def __aexit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        traceback: TracebackType | None,
    ) -> None:
        await self.aclose()

    async def aclose(self) -> None:
        await self._client.aclose()

    async def fetch(self, url: str) -> FetchOutcome:
        """Retrieve ``url``; failures come back as outcome categories."""

        started = self._clock()
        attempts = 0
        while True:
            attempts += 1
            status: int | None = None
            failure: TransportFailure | None = None
            response: httpx.Response | None = None
            body = b""
            try:
                async with asyncio.timeout(self.policy.timeout_ms / 1000):
                    response, body = await self._get(url)
            except (httpx.TimeoutException, TimeoutError) as exc:
                failure = TransportFailure.TIMEOUT
                detail = str(exc) or type(exc).__name__
            except httpx.TooManyRedirects as exc:
                LOGGER.warning("Giving up on %s after too many redirects: %s", url, exc)
                return self._outcome(FetchCategory.UNREACHABLE, None, attempts, started)
            except (httpx.RequestError, httpx.InvalidURL) as exc:
                failure = TransportFailure.CONNECTION
                detail = str(exc) or type(exc).__name__
            else:
                status = response.status_code
                detail = f"HTTP {status}"

            category = classify(status, failure=failure)
            if category is FetchCategory.OK and response is not None:
                return self._success(response, body, attempts, started)
            if not is_transient(category, status) or attempts >= self.policy.max_attempts:
                if attempts > 1:
                    LOGGER.warning("Fetch of %s ended as %s after %s attempts", url, category.value, attempts)
                final_url = str(response.url) if response is not None else None
                return self._outcome(category, status, attempts, started, final_url=final_url)
            LOGGER.warning("Fetch attempt %s/%s for %s failed: %s", attempts, self.policy.max_attempts, url, detail)
            await self._sleep(self.policy.retry_delay_ms / 1000)

    async def _get(self, url: str) -> tuple[httpx.Response, bytes]:
        async with self._client.stream("GET", url) as response:
            if not response.is_success:
                return response, b""
            chunks: list[bytes] = []
            size = 0
            async for chunk in response.aiter_bytes():
                chunks.append(chunk)
                size += len(chunk)
                if size >= self.policy.max_body_bytes:
                    LOGGER.info("Body of %s cut at %s bytes", url, self.policy.max_body_bytes)
                    break
            return response, b"".join(chunks)[: self.policy.max_body_bytes]

    def _success(self, response: httpx.Response, body: bytes, attempts: int, started: float) -> FetchOutcome:
        content_type = response.headers.get("content-type")
        extracted = extract_text(body, content_type)
        return FetchOutcome(
            category=FetchCategory.OK,
            http_status=response.status_code,
            attempts=attempts,
            elapsed_ms=self._elapsed(started),
            content=extracted.text,
            final_url=str(response.url),
            content_type=content_type,
            flags=extracted.flags,
        )

    def _outcome(
        self,
        category: FetchCategory,
        status: int | None,
        attempts: int,
        started: float,
        *,
        final_url: str | None = None,
    ) -> FetchOutcome:
        return FetchOutcome(
            category=category,
            http_status=status,
            attempts=attempts,
            elapsed_ms=self._elapsed(started),
            final_url=final_url,
        )

    def _elapsed(self, started: float) -> int:
        return max(int((self._clock() - started) * 1000), 0)


async def fetch(
    url: str,
    policy: FetchPolicy | None = None,
    *,
    transport: httpx.AsyncBaseTransport | None = None,
    sleep: Sleep = asyncio.sleep,
    clock: Clock = time.monotonic,
) -> FetchOutcome:
    """Fetch a single URL with a short-lived :class:`HttpFetcher`."""

    async with HttpFetcher(policy, transport=transport, sleep=sleep, clock=clock) as fetcher:
        return await fetcher.fetch(url)


__all__ = ["Clock", "HttpFetcher", "Sleep", "fetch"]
