from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deepcite.metrics import (
    Rate,
    adjusted_pass_rate,
    all_pairs_rate,
    error_breakdown,
    error_category,
    pass_rate,
    render_percent,
    success_rate,
)
from deepcite.models import Dimension, EvalFlag
from deepcite.runner import RunRecord
from tests.utils import make_document, make_eval


@pytest.mark.parametrize(
    ("numerator", "denominator", "expected"),
    [
        (2158, 2159, "100.0%"),
        (5, 30, "16.7%"),
        (1, 6, "16.7%"),
        (11, 14, "78.6%"),
        (27, 30, "90.0%"),
        (30, 30, "100.0%"),
        (800, 997, "80.2%"),
        (0, 7, "0.0%"),
        (1, 16, "6.3%"),
        (1, 2000, "0.1%"),
    ],
)
def test_render_percent_rounds_half_up_to_one_decimal(numerator: int, denominator: int, expected: str) -> None:
    assert render_percent(numerator, denominator) == expected
    assert Rate(numerator, denominator).render() == expected


def test_rate_without_denominator_is_undefined() -> None:
    rate = Rate(0, 0)

    assert not rate.defined
    assert rate.value is None
    assert rate.render() == "n/a"


def test_rate_rejects_impossible_counts() -> None:
    with pytest.raises(ValueError):
        Rate(3, 2)
    with pytest.raises(ValueError):
        Rate(-1, 2)


def test_rate_value_is_exact() -> None:
    assert Rate(11, 14).value == Fraction(11, 14)
    assert Rate(1, 3).percent == Fraction(100, 3)


def _record(query_id: str, *, with_pairs: bool) -> RunRecord:
    document = make_document([[1]] if with_pairs else [])
    return RunRecord(query_id=query_id, query="", document=document)


def test_success_rate_counts_reports_with_pairs() -> None:
    records = [_record(f"q{index}", with_pairs=index < 27) for index in range(30)]

    rate = success_rate(records)

    assert (rate.numerator, rate.denominator) == (27, 30)
    assert rate.render() == "90.0%"


def test_success_rate_rejects_empty_input() -> None:
    with pytest.raises(ValueError):
        success_rate([])


def test_pass_rate_excludes_not_evaluated_from_denominator() -> None:
    evals = (
        [make_eval(Dimension.FACT_CHECK, 1, attribution_id=index) for index in range(11)]
        + [make_eval(Dimension.FACT_CHECK, 0, attribution_id=100 + index) for index in range(3)]
        + [make_eval(Dimension.FACT_CHECK, None, attribution_id=200 + index) for index in range(2)]
        + [make_eval(Dimension.LINK_WORKS, 0)]
    )

    assert pass_rate(evals, Dimension.FACT_CHECK) == Rate(11, 14)
    assert pass_rate(evals, Dimension.FACT_CHECK).render() == "78.6%"
    assert all_pairs_rate(evals, Dimension.FACT_CHECK) == Rate(11, 16)


def test_pass_rate_of_link_works_pins_near_perfect_rendering() -> None:
    evals = [make_eval(Dimension.LINK_WORKS, 1, attribution_id=index) for index in range(2158)]
    evals.append(make_eval(Dimension.LINK_WORKS, 0, attribution_id=9999, fetch_category="http_error(404)"))

    assert pass_rate(evals, Dimension.LINK_WORKS).render() == "100.0%"


def test_adjusted_pass_rate_drops_rate_limited_pairs() -> None:
    evals = [make_eval(Dimension.LINK_WORKS, 1, attribution_id=index) for index in range(800)]
    evals += [make_eval(Dimension.LINK_WORKS, 0, attribution_id=1000 + index, fetch_category="http_error(404)") for index in range(197)]
    evals += [
        make_eval(
            Dimension.LINK_WORKS,
            0,
            attribution_id=2000 + index,
            fetch_category="rate_limited",
            flags=[EvalFlag.RATE_LIMITED_SOURCE],
        )
        for index in range(3)
    ]

    assert pass_rate(evals, Dimension.LINK_WORKS).render() == "80.0%"
    adjusted = adjusted_pass_rate(evals, Dimension.LINK_WORKS)
    assert adjusted == Rate(800, 997)
    assert adjusted.render() == "80.2%"


def test_adjusted_pass_rate_equals_raw_without_rate_limiting() -> None:
    evals = [make_eval(Dimension.RELEVANT_CONTENT, score, attribution_id=index) for index, score in enumerate([1, 0, 1, None])]

    assert adjusted_pass_rate(evals, Dimension.RELEVANT_CONTENT) == pass_rate(evals, Dimension.RELEVANT_CONTENT)


def test_adjusted_pass_rate_is_undefined_when_everything_was_rate_limited() -> None:
    evals = [make_eval(Dimension.LINK_WORKS, 0, fetch_category="rate_limited", flags=[EvalFlag.RATE_LIMITED_SOURCE])]

    assert adjusted_pass_rate(evals, Dimension.LINK_WORKS).render() == "n/a"


@pytest.mark.parametrize(
    ("label", "expected"),
    [
        ("http_error(404)", "http_error(4xx)"),
        ("http_error(410)", "http_error(4xx)"),
        ("http_error(503)", "http_error(5xx)"),
        ("http_error(302)", "http_error(other)"),
        ("blocked", "blocked"),
        ("timeout", "timeout"),
        ("unreachable", "unreachable"),
        ("rate_limited", "rate_limited"),
        ("ok", "empty_content"),
        (None, "empty_content"),
    ],
)
def test_error_category_buckets(label: str | None, expected: str) -> None:
    assert error_category(label) == expected


def test_error_breakdown_counts_link_failures() -> None:
    evals = [
        make_eval(Dimension.LINK_WORKS, 0, attribution_id=1, fetch_category="http_error(404)"),
        make_eval(Dimension.LINK_WORKS, 0, attribution_id=2, fetch_category="blocked"),
        make_eval(Dimension.LINK_WORKS, 0, attribution_id=3, fetch_category="timeout"),
        make_eval(Dimension.LINK_WORKS, 1, attribution_id=4),
        make_eval(Dimension.RELEVANT_CONTENT, None, attribution_id=1, fetch_category="http_error(404)"),
    ]

    assert error_breakdown(evals) == {"http_error(4xx)": 1, "blocked": 1, "timeout": 1}


def test_error_breakdown_of_clean_run_is_empty() -> None:
    evals = [make_eval(Dimension.LINK_WORKS, 1, attribution_id=index) for index in range(5)]

    assert error_breakdown(evals) == {}


_LINK_LABELS = st.sampled_from(["ok", "http_error(404)", "http_error(500)", "http_error(301)", "blocked", "timeout", "unreachable", "rate_limited"])
_SCORES = st.sampled_from([0, 1, None])
_DIMENSIONS = st.sampled_from([Dimension.RELEVANT_CONTENT, Dimension.FACT_CHECK])


@given(st.lists(st.tuples(st.sampled_from([0, 1]), _LINK_LABELS), max_size=50))
def test_error_breakdown_sums_to_link_failures(rows: list[tuple[int, str]]) -> None:
    evals = [make_eval(Dimension.LINK_WORKS, score, attribution_id=index, fetch_category=label) for index, (score, label) in enumerate(rows)]

    assert sum(error_breakdown(evals).values()) == sum(1 for score, _ in rows if score == 0)


@given(st.lists(st.tuples(_DIMENSIONS, _SCORES, st.booleans()), max_size=50), _DIMENSIONS)
def test_rates_match_naive_recount(rows: list[tuple[Dimension, int | None, bool]], dimension: Dimension) -> None:
    evals = [
        make_eval(kind, score, attribution_id=index, flags=[EvalFlag.RATE_LIMITED_SOURCE] if limited else [])
        for index, (kind, score, limited) in enumerate(rows)
    ]
    mine = [row for row in rows if row[0] is dimension]
    passed = len([row for row in mine if row[1] == 1])
    failed = len([row for row in mine if row[1] == 0])
    kept = [row for row in mine if not row[2]]

    assert pass_rate(evals, dimension) == Rate(passed, passed + failed)
    assert all_pairs_rate(evals, dimension) == Rate(passed, len(mine))
    assert adjusted_pass_rate(evals, dimension) == Rate(
        len([row for row in kept if row[1] == 1]),
        len([row for row in kept if row[1] is not None]),
    )


@given(st.lists(_SCORES, max_size=40), st.sampled_from([0, 1]))
def test_pass_rate_is_monotone(scores: list[int | None], extra: int) -> None:
    evals = [make_eval(Dimension.FACT_CHECK, score, attribution_id=index) for index, score in enumerate(scores)]
    before = pass_rate(evals, Dimension.FACT_CHECK)
    after = pass_rate([*evals, make_eval(Dimension.FACT_CHECK, extra, attribution_id=len(scores))], Dimension.FACT_CHECK)

    if before.value is None:
        return
    assert after.value is not None
    if extra == 1:
        assert after.value >= before.value
    else:
        assert after.value <= before.value


@settings(max_examples=50, deadline=None)
@given(
    st.integers(min_value=0, max_value=1500),
    st.integers(min_value=0, max_value=1500),
    st.integers(min_value=0, max_value=5),
)
def test_small_rate_limited_share_barely_moves_the_adjusted_rate(passed: int, failed: int, limited: int) -> None:
    total = passed + failed + limited
    if total == 0 or limited * 1000 >= 3 * total:
        return
    evals = [make_eval(Dimension.LINK_WORKS, 1, attribution_id=index) for index in range(passed)]
    evals += [make_eval(Dimension.LINK_WORKS, 0, attribution_id=passed + index, fetch_category="timeout") for index in range(failed)]
    evals += [
        make_eval(
            Dimension.LINK_WORKS,
            0,
            attribution_id=passed + failed + index,
            fetch_category="rate_limited",
            flags=[EvalFlag.RATE_LIMITED_SOURCE],
        )
        for index in range(limited)
    ]

    raw = pass_rate(evals, Dimension.LINK_WORKS).percent
    adjusted = adjusted_pass_rate(evals, Dimension.LINK_WORKS).percent

    assert raw is not None
    if adjusted is not None:
        assert abs(adjusted - raw) < Fraction(1, 2)
