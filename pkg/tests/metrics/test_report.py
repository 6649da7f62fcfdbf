from __future__ import annotations

from fractions import Fraction

import pytest

from deepcite.metrics import (
    DimensionStats,
    MetricsReport,
    ablation_table,
    build_metrics,
    depth_degradation,
    metrics_from_documents,
    render_points,
)
from deepcite.models import ALL_DIMENSIONS, Dimension, EvalFlag
from deepcite.runner import RunRecord
from tests.utils import make_document, make_eval


def _evaluated_document():
    document = make_document([[1], [1, 2]])
    evals = [
        make_eval(Dimension.LINK_WORKS, 1, attribution_id=1, citation_id=1),
        make_eval(Dimension.RELEVANT_CONTENT, 1, attribution_id=1, citation_id=1),
        make_eval(Dimension.FACT_CHECK, 0, attribution_id=1, citation_id=1),
        make_eval(Dimension.LINK_WORKS, 1, attribution_id=2, citation_id=1),
        make_eval(Dimension.RELEVANT_CONTENT, 1, attribution_id=2, citation_id=1),
        make_eval(Dimension.FACT_CHECK, 1, attribution_id=2, citation_id=1),
        make_eval(
            Dimension.LINK_WORKS,
            0,
            attribution_id=2,
            citation_id=2,
            fetch_category="rate_limited",
            flags=[EvalFlag.RATE_LIMITED_SOURCE],
        ),
        make_eval(
            Dimension.RELEVANT_CONTENT,
            None,
            attribution_id=2,
            citation_id=2,
            fetch_category="rate_limited",
            flags=[EvalFlag.RATE_LIMITED_SOURCE, EvalFlag.FETCH_FAILED],
        ),
        make_eval(
            Dimension.FACT_CHECK,
            None,
            attribution_id=2,
            citation_id=2,
            fetch_category="rate_limited",
            flags=[EvalFlag.RATE_LIMITED_SOURCE, EvalFlag.FETCH_FAILED],
        ),
    ]
    return document.with_evals(evals)


def test_metrics_from_documents_counts_every_dimension() -> None:
    document = _evaluated_document()

    report = metrics_from_documents([document, make_document([])], label="model-a")

    assert report.n_queries == 2
    assert report.n_success == 1
    assert report.n_pairs == 3
    assert report.rate_limited_pairs == 1
    link = report.stats(Dimension.LINK_WORKS)
    assert link is not None
    assert (link.passed, link.failed, link.not_evaluated) == (2, 1, 0)
    assert link.adjusted.render() == "100.0%"
    fact = report.stats(Dimension.FACT_CHECK)
    assert fact is not None
    assert (fact.passed, fact.failed, fact.not_evaluated) == (1, 1, 1)
    assert fact.pass_rate.render() == "50.0%"
    assert fact.all_pairs_rate.render() == "33.3%"
    assert report.error_breakdown == {"rate_limited": 1}
    for stats in report.dimensions:
        assert stats.total == report.n_pairs


def test_metrics_only_cover_requested_dimensions() -> None:
    document = make_document([[1]]).with_evals([make_eval(Dimension.LINK_WORKS, 1)])

    report = metrics_from_documents([document], label="links-only", dimensions=[Dimension.LINK_WORKS])

    assert [stats.dimension for stats in report.dimensions] == [Dimension.LINK_WORKS]
    assert report.rate(Dimension.RELEVANT_CONTENT).render() == "n/a"


def test_metrics_for_run_without_pairs_report_every_dimension_as_undefined() -> None:
    report = metrics_from_documents([make_document([])], label="empty")

    assert tuple(stats.dimension for stats in report.dimensions) == ALL_DIMENSIONS
    assert report.success_rate.render() == "0.0%"
    assert all(report.rate(dimension).render() == "n/a" for dimension in ALL_DIMENSIONS)


def test_build_metrics_uses_record_budget() -> None:
    records = [
        RunRecord(query_id="q1", query="", document=_evaluated_document(), budget=10),
        RunRecord(query_id="q2", query="", document=make_document([]), budget=10, error="no report"),
    ]

    report = build_metrics(records, label="model-a-b10")

    assert report.budget == 10
    assert report.success_rate.render() == "50.0%"


def test_build_metrics_rejects_empty_input() -> None:
    with pytest.raises(ValueError):
        build_metrics([], label="nothing")


def test_metrics_report_round_trips_through_dict() -> None:
    report = metrics_from_documents([_evaluated_document()], label="model-a", budget=30)

    assert MetricsReport.from_dict(report.to_dict()) == report


def _fact_report(label: str, passed: int, failed: int, budget: int) -> MetricsReport:
    return MetricsReport(
        label=label,
        n_queries=1,
        n_success=1,
        n_pairs=passed + failed,
        dimensions=(DimensionStats(Dimension.FACT_CHECK, passed=passed, failed=failed),),
        budget=budget,
    )


def test_ablation_table_sorts_rows_by_budget() -> None:
    per_budget = {
        50: _fact_report("b50", 8, 2, 50),
        2: _fact_report("b2", 11, 3, 2),
        10: _fact_report("b10", 9, 1, 10),
    }

    rows = ablation_table(per_budget)

    assert [row.budget for row in rows] == [2, 10, 50]
    assert rows[0].report.rate(Dimension.FACT_CHECK).render() == "78.6%"


def test_ablation_table_with_single_budget_has_one_row() -> None:
    assert [row.budget for row in ablation_table({2: _fact_report("b2", 1, 1, 2)})] == [2]


def test_depth_degradation_is_measured_in_points() -> None:
    rows = ablation_table({150: _fact_report("b150", 27, 3, 150), 2: _fact_report("b2", 11, 3, 2)})

    degradation = depth_degradation(rows)

    assert degradation == {Dimension.FACT_CHECK: Fraction(-80, 7)}
    assert render_points(degradation[Dimension.FACT_CHECK]) == "-11.4 pts"


@pytest.mark.parametrize(
    ("value", "expected"),
    [(None, "n/a"), (Fraction(0), "0.0 pts"), (Fraction(5, 2), "2.5 pts"), (Fraction(-1, 40), "0.0 pts"), (Fraction(1, 20), "0.1 pts")],
)
def test_render_points(value: Fraction | None, expected: str) -> None:
    assert render_points(value) == expected
