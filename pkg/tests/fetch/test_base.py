from __future__ import annotations

import pytest

from deepcite.fetch import FetchCategory, FetchOutcome, FetchPolicy, TransportFailure, classify, is_transient, truncate


@pytest.mark.parametrize(
    ("status", "expected"),
    [
        (200, FetchCategory.OK),
        (204, FetchCategory.OK),
        (299, FetchCategory.OK),
        (301, FetchCategory.HTTP_ERROR),
        (403, FetchCategory.BLOCKED),
        (404, FetchCategory.HTTP_ERROR),
        (429, FetchCategory.RATE_LIMITED),
        (500, FetchCategory.HTTP_ERROR),
        (599, FetchCategory.HTTP_ERROR),
    ],
)
def test_classify_status(status: int, expected: FetchCategory) -> None:
    assert classify(status) is expected


def test_classify_transport_failures() -> None:
    assert classify(failure=TransportFailure.TIMEOUT) is FetchCategory.TIMEOUT
    assert classify(failure=TransportFailure.CONNECTION) is FetchCategory.UNREACHABLE


@pytest.mark.parametrize("kwargs", [{}, {"status": 200, "failure": TransportFailure.TIMEOUT}, {"status": 99}, {"status": 600}])
def test_classify_rejects_bad_input(kwargs: dict) -> None:
    with pytest.raises(ValueError):
        classify(**kwargs)


def test_transient_categories() -> None:
    assert is_transient(FetchCategory.TIMEOUT)
    assert is_transient(FetchCategory.UNREACHABLE)
    assert is_transient(FetchCategory.RATE_LIMITED, 429)
    assert is_transient(FetchCategory.HTTP_ERROR, 503)
    assert not is_transient(FetchCategory.HTTP_ERROR, 404)
    assert not is_transient(FetchCategory.BLOCKED, 403)
    assert not is_transient(FetchCategory.OK, 200)


def test_policy_defaults() -> None:
    policy = FetchPolicy()

    assert (policy.max_retries, policy.retry_delay_ms, policy.timeout_ms, policy.truncation_limit) == (5, 5000, 30000, 5000)
    assert policy.max_attempts == 6
    assert policy.fact_check_limit == 5000
    assert FetchPolicy(fact_check_truncation_limit=100_000).fact_check_limit == 100_000


@pytest.mark.parametrize(
    "kwargs",
    [{"max_retries": 0}, {"timeout_ms": -1}, {"truncation_limit": 0}, {"fact_check_truncation_limit": 0}, {"user_agent": " "}],
)
def test_policy_rejects_invalid_values(kwargs: dict) -> None:
    with pytest.raises(ValueError):
        FetchPolicy(**kwargs)


def test_outcome_content_matches_category() -> None:
    with pytest.raises(ValueError):
        FetchOutcome(category=FetchCategory.OK, http_status=200, attempts=1, elapsed_ms=0)
    with pytest.raises(ValueError):
        FetchOutcome(category=FetchCategory.BLOCKED, http_status=403, attempts=1, elapsed_ms=0, content="text")
    with pytest.raises(ValueError):
        FetchOutcome(category=FetchCategory.RATE_LIMITED, http_status=503, attempts=1, elapsed_ms=0)
    with pytest.raises(ValueError):
        FetchOutcome(category=FetchCategory.TIMEOUT, http_status=None, attempts=0, elapsed_ms=0)


def test_outcome_labels() -> None:
    assert FetchOutcome(category=FetchCategory.HTTP_ERROR, http_status=404, attempts=1, elapsed_ms=3).label == "http_error(404)"
    assert FetchOutcome(category=FetchCategory.TIMEOUT, http_status=None, attempts=6, elapsed_ms=3).label == "timeout"


def test_whitespace_content_is_not_accessible() -> None:
    outcome = FetchOutcome(category=FetchCategory.OK, http_status=200, attempts=1, elapsed_ms=0, content="  \n")

    assert not outcome.accessible


def test_truncate() -> None:
    assert truncate("abcdef", 4) == "abcd"
    assert truncate("ab", 4) == "ab"
    with pytest.raises(ValueError):
        truncate("ab", 0)
