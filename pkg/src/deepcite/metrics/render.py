"""Render metrics reports and ablation tables as JSON, Markdown or CSV."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Sequence
from enum import StrEnum
from typing import Any

from deepcite.errors import RenderError
from deepcite.metrics.rates import ERROR_CATEGORIES, Rate
from deepcite.metrics.report import AblationRow, MetricsReport, depth_degradation, render_points
from deepcite.models import ALL_DIMENSIONS, Dimension


class OutputFormat(StrEnum):
    JSON = "json"
    MARKDOWN_TABLE = "markdown_table"
    CSV = "csv"

    @property
    def suffix(self) -> str:
        return {"json": ".json", "markdown_table": ".md", "csv": ".csv"}[self.value]


COLUMN_TITLES: dict[Dimension, str] = {
    Dimension.LINK_WORKS: "Link Works",
    Dimension.RELEVANT_CONTENT: "Relevant",
    Dimension.FACT_CHECK: "Fact Check",
}

ABLATION_CSV_FIELDS = ("budget", "dimension", "passed", "failed", "not_evaluated", "rate")


def coerce_format(value: str | OutputFormat) -> OutputFormat:
    """Resolve a format name; ``md`` and ``markdown`` are accepted aliases.

    Raises:
        RenderError: If the format is unknown.
    """

    if isinstance(value, OutputFormat):
        return value
    name = {"md": "markdown_table", "markdown": "markdown_table"}.get(value, value)
    try:
        return OutputFormat(name)
    except ValueError as exc:
        choices = ", ".join(item.value for item in OutputFormat)
        msg = f"Unknown report format {value!r}; expected one of {choices}"
        raise RenderError(msg) from exc


def sort_reports(reports: Sequence[MetricsReport]) -> list[MetricsReport]:
    """Descending relevant-content pass rate; undefined rates last; ties by label."""

    def key(report: MetricsReport) -> tuple[int, Any, str]:
        value = report.rate(Dimension.RELEVANT_CONTENT).value
        return (1, 0, report.label) if value is None else (0, -value, report.label)

    return sorted(reports, key=key)


def _cell(value: str) -> str:
    return " ".join(str(value).split()).replace("|", "\\|")


def _markdown(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(map(_cell, header)) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines.extend("| " + " | ".join(map(_cell, row)) + " |" for row in rows)
    return "\n".join(lines) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _report_csv_header() -> list[str]:
    header = ["label", "budget", "n_queries", "n_success", "success_rate", "n_pairs"]
    for dimension in ALL_DIMENSIONS:
        name = dimension.value
        header += [f"{name}_passed", f"{name}_failed", f"{name}_not_evaluated", f"{name}_rate", f"{name}_all_pairs_rate", f"{name}_adjusted_rate"]
    header += [f"errors_{category}" for category in ERROR_CATEGORIES]
    return header


def _report_csv_row(report: MetricsReport) -> list[Any]:
    row: list[Any] = [
        report.label,
        "" if report.budget is None else report.budget,
        report.n_queries,
        report.n_success,
        report.success_rate.render(),
        report.n_pairs,
    ]
    for dimension in ALL_DIMENSIONS:
        stats = report.stats(dimension)
        if stats is None:
            row += ["", "", "", "n/a", "n/a", "n/a"]
            continue
        row += [
            stats.passed,
            stats.failed,
            stats.not_evaluated,
            stats.pass_rate.render(),
            stats.all_pairs_rate.render(),
            stats.adjusted.render(),
        ]
    row += [report.error_breakdown.get(category, 0) for category in ERROR_CATEGORIES]
    return row


def render_table(reports: Sequence[MetricsReport], fmt: str | OutputFormat) -> bytes:
    """Render several runs as one table, one row per run, sorted by :func:`sort_reports`.

    Raises:
        RenderError: If ``fmt`` is unknown.
    """

    output = coerce_format(fmt)
    ordered = sort_reports(reports)
    if output is OutputFormat.JSON:
        text = json.dumps({"reports": [report.to_dict() for report in ordered]}, indent=2, ensure_ascii=False) + "\n"
    elif output is OutputFormat.MARKDOWN_TABLE:
        header = ["Model", "Success", *(COLUMN_TITLES[dimension] for dimension in ALL_DIMENSIONS)]
        rows = [
            [report.label, report.success_rate.render(), *(report.rate(dimension).render() for dimension in ALL_DIMENSIONS)]
            for report in ordered
        ]
        text = _markdown(header, rows)
    else:
        text = _csv(_report_csv_header(), [_report_csv_row(report) for report in ordered])
    return text.encode("utf-8")


def render_report(report: MetricsReport, fmt: str | OutputFormat) -> bytes:
    """Render one run.  JSON is the report's own mapping, so it decodes back to an equal report.

    Raises:
        RenderError: If ``fmt`` is unknown.
    """

    output = coerce_format(fmt)
    if output is OutputFormat.JSON:
        return (json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    return render_table([report], output)


def _ablation_rate(row: AblationRow, dimension: Dimension) -> Rate:
    return row.report.rate(dimension)


def render_ablation(rows: Sequence[AblationRow], fmt: str | OutputFormat) -> bytes:
    """Render per-budget rows in ascending budget order.

    CSV is long-form (one line per budget and dimension); Markdown is one row
    per budget followed by the depth degradation between the smallest and
    largest budget.

    Raises:
        RenderError: If ``fmt`` is unknown.
    """

    output = coerce_format(fmt)
    ordered = sorted(rows, key=lambda row: row.budget)
    if output is OutputFormat.CSV:
        lines = []
        for row in ordered:
            for stats in row.report.dimensions:
                lines.append([row.budget, stats.dimension.value, stats.passed, stats.failed, stats.not_evaluated, stats.pass_rate.render()])
        return _csv(ABLATION_CSV_FIELDS, lines).encode("utf-8")
    if output is OutputFormat.JSON:
        payload = {
            "rows": [{"budget": row.budget, "report": row.report.to_dict()} for row in ordered],
            "depth_degradation": {dimension.value: render_points(value) for dimension, value in depth_degradation(ordered).items()},
        }
        return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    header = ["Budget", *(COLUMN_TITLES[dimension] for dimension in ALL_DIMENSIONS)]
    table = [[str(row.budget), *(_ablation_rate(row, dimension).render() for dimension in ALL_DIMENSIONS)] for row in ordered]
    text = _markdown(header, table)
    degradation = depth_degradation(ordered)
    if len(ordered) > 1 and degradation:
        text += "\nDepth degradation ({} -> {}): {}\n".format(
            ordered[0].budget,
            ordered[-1].budget,
            ", ".join(f"{COLUMN_TITLES[dimension]} {render_points(value)}" for dimension, value in degradation.items()),
        )
    return text.encode("utf-8")


__all__ = [
    "ABLATION_CSV_FIELDS",
    "COLUMN_TITLES",
    "OutputFormat",
    "coerce_format",
    "render_ablation",
    "render_report",
    "render_table",
    "sort_reports",
]
