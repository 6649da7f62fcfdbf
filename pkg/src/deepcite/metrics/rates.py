"""Exact pass-rate arithmetic.

Rates are kept as integer numerator/denominator pairs.  Rendering is the only
lossy step: one decimal, rounded half up, computed in integer arithmetic.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Any

from deepcite.models import Dimension, EvalFlag, EvalResult

if TYPE_CHECKING:  # pragma: no cover - imported for type checkers only
    from deepcite.runner.batch import RunRecord

UNDEFINED = "n/a"

ERROR_CATEGORIES: tuple[str, ...] = (
    "http_error(4xx)",
    "http_error(5xx)",
    "http_error(other)",
    "blocked",
    "timeout",
    "unreachable",
    "rate_limited",
    "empty_content",
)


def render_percent(numerator: int, denominator: int) -> str:
    """Render ``numerator / denominator`` as a percentage with one decimal, half up."""

    if denominator <= 0:
        return UNDEFINED
    tenths = (2 * numerator * 1000 + denominator) // (2 * denominator)
    return f"{tenths // 10}.{tenths % 10}%"


@dataclass(slots=True, frozen=True)
class Rate:
    """A proportion with an exact value; an empty denominator is undefined, not zero."""

    numerator: int
    denominator: int

    def __post_init__(self) -> None:
        if self.denominator < 0 or not 0 <= self.numerator <= self.denominator:
            msg = f"Invalid rate {self.numerator}/{self.denominator}"
            raise ValueError(msg)

    @property
    def defined(self) -> bool:
        return self.denominator > 0

    @property
    def value(self) -> Fraction | None:
        return Fraction(self.numerator, self.denominator) if self.defined else None

    @property
    def percent(self) -> Fraction | None:
        value = self.value
        return value * 100 if value is not None else None

    def render(self) -> str:
        return render_percent(self.numerator, self.denominator)

    def __str__(self) -> str:
        return self.render()

    def to_dict(self) -> dict[str, Any]:
        return {"numerator": self.numerator, "denominator": self.denominator, "rendered": self.render()}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> Rate:
        return cls(int(payload["numerator"]), int(payload["denominator"]))


def _of(evals: Iterable[EvalResult], dimension: Dimension) -> list[EvalResult]:
    return [result for result in evals if result.dimension is dimension]


def success_rate(records: Sequence[RunRecord]) -> Rate:
    """Share of queries whose report produced at least one citation-claim pair.

    Raises:
        ValueError: If ``records`` is empty.
    """

    if not records:
        msg = "success_rate needs at least one run record"
        raise ValueError(msg)
    return Rate(sum(record.success for record in records), len(records))


def pass_rate(evals: Iterable[EvalResult], dimension: Dimension) -> Rate:
    """Passed over evaluated results of ``dimension``; ``not_evaluated`` is excluded."""

    results = _of(evals, dimension)
    passed = sum(result.score == 1 for result in results)
    failed = sum(result.score == 0 for result in results)
    return Rate(passed, passed + failed)


def all_pairs_rate(evals: Iterable[EvalResult], dimension: Dimension) -> Rate:
    """Passed over every result of ``dimension``, counting ``not_evaluated`` as not passed."""

    results = _of(evals, dimension)
    return Rate(sum(result.score == 1 for result in results), len(results))


def adjusted_pass_rate(evals: Iterable[EvalResult], dimension: Dimension) -> Rate:
    """:func:`pass_rate` after dropping results flagged ``rate_limited_source``."""

    return pass_rate((result for result in evals if EvalFlag.RATE_LIMITED_SOURCE not in result.flags), dimension)


def error_category(fetch_category: str | None) -> str:
    """Bucket a fetch category label such as ``http_error(404)`` for breakdowns."""

    if fetch_category is None or fetch_category == "ok":
        return "empty_content"
    if fetch_category.startswith("http_error(") and fetch_category.endswith(")"):
        code = fetch_category[len("http_error(") : -1]
        if code.isdigit() and 400 <= int(code) <= 499:  # noqa: PLR2004
            return "http_error(4xx)"
        if code.isdigit() and 500 <= int(code) <= 599:  # noqa: PLR2004
            return "http_error(5xx)"
        return "http_error(other)"
    return fetch_category


def error_breakdown(evals: Iterable[EvalResult]) -> dict[str, int]:
    """Count failed ``link_works`` results by failure category.

    Categories with no failures are omitted; the counts sum to the number of
    failed ``link_works`` results.
    """

    counts = Counter(error_category(result.fetch_category) for result in _of(evals, Dimension.LINK_WORKS) if result.score == 0)
    known = [category for category in ERROR_CATEGORIES if counts.get(category)]
    extra = sorted(category for category in counts if category not in ERROR_CATEGORIES)
    return {category: counts[category] for category in [*known, *extra]}


__all__ = [
    "ERROR_CATEGORIES",
    "UNDEFINED",
    "Rate",
    "adjusted_pass_rate",
    "all_pairs_rate",
    "error_breakdown",
    "error_category",
    "pass_rate",
    "render_percent",
    "success_rate",
]
