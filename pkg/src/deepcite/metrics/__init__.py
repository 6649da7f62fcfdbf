"""Headline metrics: success rate, pass rates, error breakdowns and ablation tables."""

from __future__ import annotations

from deepcite.metrics.rates import (
    ERROR_CATEGORIES,
    Rate,
    adjusted_pass_rate,
    all_pairs_rate,
    error_breakdown,
    error_category,
    pass_rate,
    render_percent,
    success_rate,
)
from deepcite.metrics.render import OutputFormat, coerce_format, render_ablation, render_report, render_table, sort_reports
from deepcite.metrics.report import (
    AblationRow,
    DimensionStats,
    MetricsReport,
    ablation_table,
    build_metrics,
    depth_degradation,
    metrics_from_documents,
    render_points,
)

__all__ = [
    "ERROR_CATEGORIES",
    "AblationRow",
    "DimensionStats",
    "MetricsReport",
    "OutputFormat",
    "Rate",
    "ablation_table",
    "adjusted_pass_rate",
    "all_pairs_rate",
    "build_metrics",
    "coerce_format",
    "depth_degradation",
    "error_breakdown",
    "error_category",
    "metrics_from_documents",
    "pass_rate",
    "render_ablation",
    "render_percent",
    "render_points",
    "render_report",
    "render_table",
    "sort_reports",
]
