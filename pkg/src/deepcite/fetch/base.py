"""Fetch policy, outcome taxonomy and the fetcher contract.

Every fetch ends in a :class:`FetchOutcome` value; failures are categories,
never exceptions.  The categories follow the link failure taxonomy used for
reporting: HTTP errors, blocked access, timeouts, unreachable hosts and rate
limiting.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from typing import Protocol, runtime_checkable

DEFAULT_USER_AGENT = "deepcite/0.1 (+https://pypi.org/project/deepcite/)"


class FetchCategory(StrEnum):
    """Final classification of a fetch."""

    OK = "ok"
    HTTP_ERROR = "http_error"
    BLOCKED = "blocked"
    TIMEOUT = "timeout"
    UNREACHABLE = "unreachable"
    RATE_LIMITED = "rate_limited"


class TransportFailure(StrEnum):
    """Failures that happen before an HTTP status is available."""

    TIMEOUT = "timeout"
    CONNECTION = "connection"


class ContentFlag(StrEnum):
    """Diagnostics attached to extracted content."""

    EMPTY_CONTENT = "empty_content"
    UNSUPPORTED_CONTENT = "unsupported_content"
    LOSSY_DECODE = "lossy_decode"


_TRANSIENT = frozenset({FetchCategory.TIMEOUT, FetchCategory.UNREACHABLE, FetchCategory.RATE_LIMITED})


@dataclass(slots=True, frozen=True)
class FetchPolicy:
    """Retry, timeout and truncation settings for source retrieval.

    Attributes:
        max_retries: Retries allowed after the first attempt.
        retry_delay_ms: Fixed delay between attempts.
        timeout_ms: Deadline for a single attempt.
        truncation_limit: Characters of source content shown to the relevance judge.
        user_agent: ``User-Agent`` header sent with every request.
        max_redirects: Redirect hops followed before giving up.
        fact_check_truncation_limit: Optional separate limit for the fact-check judge.
            ``None`` reuses ``truncation_limit``.
        max_body_bytes: Bytes of a response body read before the rest is dropped.
    """

    max_retries: int = 5
    retry_delay_ms: int = 5000
    timeout_ms: int = 30000
    truncation_limit: int = 5000
    user_agent: str = DEFAULT_USER_AGENT
    max_redirects: int = 10
    fact_check_truncation_limit: int | None = None
    max_body_bytes: int = 5_000_000

    def __post_init__(self) -> None:
        for name in ("max_retries", "retry_delay_ms", "timeout_ms", "truncation_limit", "max_redirects", "max_body_bytes"):
            if getattr(self, name) <= 0:
                msg = f"FetchPolicy.{name} must be positive"
                raise ValueError(msg)
        if self.fact_check_truncation_limit is not None and self.fact_check_truncation_limit <= 0:
            msg = "FetchPolicy.fact_check_truncation_limit must be positive"
            raise ValueError(msg)
        if not self.user_agent.strip():
            msg = "FetchPolicy.user_agent must be a non-empty string"
            raise ValueError(msg)

    @property
    def max_attempts(self) -> int:
        return 1 + self.max_retries

    @property
    def fact_check_limit(self) -> int:
        """Truncation limit applied to fact-check prompts."""

        return self.fact_check_truncation_limit or self.truncation_limit


@dataclass(slots=True, frozen=True)
class FetchOutcome:
    """Result of retrieving one cited URL.

    ``content`` is present exactly when the category is ``ok``; it holds the
    extracted text, which may be empty.
    """

    category: FetchCategory
    http_status: int | None
    attempts: int
    elapsed_ms: int
    content: str | None = None
    final_url: str | None = None
    content_type: str | None = None
    flags: frozenset[ContentFlag] = frozenset()

    def __post_init__(self) -> None:
        if self.attempts < 1:
            msg = "FetchOutcome.attempts must be at least 1"
            raise ValueError(msg)
        if (self.category is FetchCategory.OK) != (self.content is not None):
            msg = "FetchOutcome.content must be present exactly when the category is 'ok'"
            raise ValueError(msg)
        if self.category is FetchCategory.RATE_LIMITED and self.http_status != 429:  # noqa: PLR2004
            msg = "rate_limited outcomes must carry HTTP status 429"
            raise ValueError(msg)

    @property
    def label(self) -> str:
        """Category label, with the status code for HTTP errors (``http_error(404)``)."""

        if self.category is FetchCategory.HTTP_ERROR:
            return f"http_error({self.http_status})"
        return self.category.value

    @property
    def accessible(self) -> bool:
        """Whether the URL returned usable content."""

        return self.category is FetchCategory.OK and bool(self.content and self.content.strip())


@runtime_checkable
class Fetcher(Protocol):
    """Contract implemented by source retrieval backends.

    Implementations must tolerate concurrent ``fetch`` calls; the runner owns the
    concurrency bound.  A script-executing renderer plugs in here.
    """

    async def fetch(self, url: str) -> FetchOutcome:
        """Retrieve ``url`` and return its classified outcome."""

    async def aclose(self) -> None:
        """Release pooled connections."""


def classify(status: int | None = None, *, failure: TransportFailure | None = None) -> FetchCategory:
    """Map a final HTTP status or transport failure onto a :class:`FetchCategory`.

    Args:
        status: Final HTTP status code in ``100..599``.
        failure: Transport failure observed instead of a status.

    Returns:
        The outcome category.

    Raises:
        ValueError: If neither or both inputs are given, or the status is out of range.
    """

    if (status is None) == (failure is None):
        msg = "classify() needs exactly one of 'status' or 'failure'"
        raise ValueError(msg)
    if failure is not None:
        return FetchCategory.TIMEOUT if failure is TransportFailure.TIMEOUT else FetchCategory.UNREACHABLE
    assert status is not None
    if not 100 <= status <= 599:  # noqa: PLR2004
        msg = f"HTTP status {status} is outside 100..599"
        raise ValueError(msg)
    if 200 <= status < 300:  # noqa: PLR2004
        return FetchCategory.OK
    if status == 403:  # noqa: PLR2004
        return FetchCategory.BLOCKED
    if status == 429:  # noqa: PLR2004
        return FetchCategory.RATE_LIMITED
    return FetchCategory.HTTP_ERROR


def is_transient(category: FetchCategory, status: int | None = None) -> bool:
    """Return ``True`` when a failed attempt is worth retrying."""

    if category in _TRANSIENT:
        return True
    return category is FetchCategory.HTTP_ERROR and status is not None and 500 <= status <= 599  # noqa: PLR2004


def truncate(text: str, limit: int) -> str:
    """Return the first ``limit`` characters of ``text``."""

    if limit <= 0:
        msg = "truncation limit must be positive"
        raise ValueError(msg)
    return text[:limit]


__all__ = [
    "DEFAULT_USER_AGENT",
    "ContentFlag",
    "FetchCategory",
    "FetchOutcome",
    "FetchPolicy",
    "Fetcher",
    "TransportFailure",
    "classify",
    "is_transient",
    "truncate",
]
