"""Aggregate evaluation results into per-run and per-budget reports."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Any

from deepcite.errors import DocumentFormatError
from deepcite.metrics.rates import Rate, adjusted_pass_rate, all_pairs_rate, error_breakdown, pass_rate
from deepcite.models import ALL_DIMENSIONS, AttributionDocument, Dimension, EvalFlag, EvalResult

if TYPE_CHECKING:  # pragma: no cover - imported for type checkers only
    from deepcite.runner.batch import RunRecord

LOGGER = logging.getLogger(__name__)


@dataclass(slots=True, frozen=True)
class DimensionStats:
    """Counts for one evaluation dimension.

    ``passed + failed + not_evaluated`` equals the number of pairs the
    dimension was run over.
    """

    dimension: Dimension
    passed: int = 0
    failed: int = 0
    not_evaluated: int = 0
    adjusted: Rate = field(default_factory=lambda: Rate(0, 0))

    @property
    def total(self) -> int:
        return self.passed + self.failed + self.not_evaluated

    @property
    def pass_rate(self) -> Rate:
        return Rate(self.passed, self.passed + self.failed)

    @property
    def all_pairs_rate(self) -> Rate:
        return Rate(self.passed, self.total)

    @classmethod
    def from_evals(cls, evals: Sequence[EvalResult], dimension: Dimension) -> DimensionStats:
        rate = pass_rate(evals, dimension)
        return cls(
            dimension=dimension,
            passed=rate.numerator,
            failed=rate.denominator - rate.numerator,
            not_evaluated=all_pairs_rate(evals, dimension).denominator - rate.denominator,
            adjusted=adjusted_pass_rate(evals, dimension),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "dimension": self.dimension.value,
            "passed": self.passed,
            "failed": self.failed,
            "not_evaluated": self.not_evaluated,
            "pass_rate": self.pass_rate.to_dict(),
            "all_pairs_rate": self.all_pairs_rate.to_dict(),
            "adjusted_pass_rate": self.adjusted.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> DimensionStats:
        return cls(
            dimension=Dimension(payload["dimension"]),
            passed=int(payload["passed"]),
            failed=int(payload["failed"]),
            not_evaluated=int(payload["not_evaluated"]),
            adjusted=Rate.from_dict(payload["adjusted_pass_rate"]),
        )


@dataclass(slots=True, frozen=True)
class MetricsReport:
    """Headline numbers for one run (one model, one budget)."""

    label: str
    n_queries: int
    n_success: int
    n_pairs: int
    dimensions: tuple[DimensionStats, ...]
    error_breakdown: dict[str, int] = field(default_factory=dict)
    rate_limited_pairs: int = 0
    budget: int | None = None

    @property
    def success_rate(self) -> Rate:
        return Rate(self.n_success, self.n_queries)

    def stats(self, dimension: Dimension) -> DimensionStats | None:
        for stats in self.dimensions:
            if stats.dimension is dimension:
                return stats
        return None

    def rate(self, dimension: Dimension) -> Rate:
        """Pass rate for ``dimension``; undefined when the dimension was not run."""

        stats = self.stats(dimension)
        return stats.pass_rate if stats is not None else Rate(0, 0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "budget": self.budget,
            "n_queries": self.n_queries,
            "n_success": self.n_success,
            "success_rate": self.success_rate.to_dict(),
            "n_pairs": self.n_pairs,
            "rate_limited_pairs": self.rate_limited_pairs,
            "dimensions": [stats.to_dict() for stats in self.dimensions],
            "error_breakdown": dict(self.error_breakdown),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> MetricsReport:
        try:
            return cls(
                label=str(payload["label"]),
                n_queries=int(payload["n_queries"]),
                n_success=int(payload["n_success"]),
                n_pairs=int(payload["n_pairs"]),
                dimensions=tuple(DimensionStats.from_dict(item) for item in payload["dimensions"]),
                error_breakdown={str(key): int(value) for key, value in payload.get("error_breakdown", {}).items()},
                rate_limited_pairs=int(payload.get("rate_limited_pairs", 0)),
                budget=payload.get("budget"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            msg = f"Malformed metrics report: {exc}"
            raise DocumentFormatError(msg) from exc


def _dimensions_run(evals: Sequence[EvalResult], requested: Iterable[Dimension] | None) -> tuple[Dimension, ...]:
    if requested is not None:
        return tuple(sorted(set(requested), key=lambda dimension: dimension.rank))
    seen = {result.dimension for result in evals}
    return tuple(sorted(seen, key=lambda dimension: dimension.rank)) if seen else ALL_DIMENSIONS


def metrics_from_documents(
    documents: Sequence[AttributionDocument],
    *,
    label: str,
    n_queries: int | None = None,
    dimensions: Iterable[Dimension] | None = None,
    budget: int | None = None,
) -> MetricsReport:
    """Build a report from evaluated documents.

    ``n_queries`` defaults to the number of documents; a document counts as a
    success when it has at least one citation-claim pair.  Dimensions default
    to those present in the results, or all of them for a run without pairs.
    """

    evals = [result for document in documents for result in document.evals]
    n_pairs = sum(len(document.pairs()) for document in documents)
    rate_limited = {
        (index, result.attribution_id, result.citation_id)
        for index, document in enumerate(documents)
        for result in document.evals
        if EvalFlag.RATE_LIMITED_SOURCE in result.flags
    }
    report = MetricsReport(
        label=label,
        n_queries=len(documents) if n_queries is None else n_queries,
        n_success=sum(document.has_pairs for document in documents),
        n_pairs=n_pairs,
        dimensions=tuple(DimensionStats.from_evals(evals, dimension) for dimension in _dimensions_run(evals, dimensions)),
        error_breakdown=error_breakdown(evals),
        rate_limited_pairs=len(rate_limited),
        budget=budget,
    )
    for stats in report.dimensions:
        if stats.total not in (0, n_pairs):
            LOGGER.warning("Dimension %s covers %s of %s pairs in %s", stats.dimension, stats.total, n_pairs, label)
    return report


def build_metrics(
    records: Sequence[RunRecord],
    *,
    label: str,
    dimensions: Iterable[Dimension] | None = None,
) -> MetricsReport:
    """Build a report from batch records.

    Raises:
        ValueError: If ``records`` is empty.
    """

    if not records:
        msg = "build_metrics needs at least one run record"
        raise ValueError(msg)
    budgets = {record.budget for record in records}
    return metrics_from_documents(
        [record.document for record in records],
        label=label,
        dimensions=dimensions,
        budget=budgets.pop() if len(budgets) == 1 else None,
    )


@dataclass(slots=True, frozen=True)
class AblationRow:
    """Metrics for one tool-call budget."""

    budget: int
    report: MetricsReport


def ablation_table(per_budget: Mapping[int, MetricsReport]) -> list[AblationRow]:
    """Rows sorted by ascending budget."""

    return [AblationRow(budget=budget, report=per_budget[budget]) for budget in sorted(per_budget)]


def depth_degradation(rows: Sequence[AblationRow]) -> dict[Dimension, Fraction | None]:
    """Pass rate at the smallest budget minus the rate at the largest, in percentage points.

    A positive value means deeper search made the dimension worse.  ``None``
    when either end has no evaluated results for the dimension.
    """

    if not rows:
        return {}
    ordered = sorted(rows, key=lambda row: row.budget)
    low, high = ordered[0].report, ordered[-1].report
    degradation: dict[Dimension, Fraction | None] = {}
    for dimension in ALL_DIMENSIONS:
        if low.stats(dimension) is None and high.stats(dimension) is None:
            continue
        start, end = low.rate(dimension).percent, high.rate(dimension).percent
        degradation[dimension] = None if start is None or end is None else start - end
    return degradation


def render_points(value: Fraction | None) -> str:
    """Render a percentage-point difference with one decimal, half away from zero."""

    if value is None:
        return "n/a"
    sign = "-" if value < 0 else ""
    magnitude = abs(value)
    tenths = (2 * magnitude.numerator * 10 + magnitude.denominator) // (2 * magnitude.denominator)
    if tenths == 0:
        sign = ""
    return f"{sign}{tenths // 10}.{tenths % 10} pts"


__all__ = [
    "AblationRow",
    "DimensionStats",
    "MetricsReport",
    "ablation_table",
    "build_metrics",
    "depth_degradation",
    "metrics_from_documents",
    "render_points",
]
