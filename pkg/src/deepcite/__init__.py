"""deepcite: evaluate source attribution in Markdown research reports."""

from deepcite.config import DeepciteSettings, load_config_file, load_settings
from deepcite.errors import (
    ConfigurationError,
    DeepciteError,
    DocumentFormatError,
    JudgeError,
    JudgeOutputError,
    JudgeUnavailableError,
    RenderError,
    ReportNotFoundError,
    ReportSourceError,
)
from deepcite.fetch import FetchPolicy, get_fetcher
from deepcite.judges import JudgeRetryPolicy, get_judge
from deepcite.metrics import MetricsReport, build_metrics, render_report
from deepcite.models import ALL_DIMENSIONS, Attribution, AttributionDocument, Citation, Dimension, EvalFlag, EvalResult
from deepcite.parser import parse_document
from deepcite.runner import PipelineRunner, RunConfig, run_ablation, run_batch, run_pipeline

__all__ = [
    "ALL_DIMENSIONS",
    "Attribution",
    "AttributionDocument",
    "Citation",
    "ConfigurationError",
    "DeepciteError",
    "DeepciteSettings",
    "Dimension",
    "DocumentFormatError",
    "EvalFlag",
    "EvalResult",
    "FetchPolicy",
    "JudgeError",
    "JudgeOutputError",
    "JudgeRetryPolicy",
    "JudgeUnavailableError",
    "MetricsReport",
    "PipelineRunner",
    "RenderError",
    "ReportNotFoundError",
    "ReportSourceError",
    "RunConfig",
    "build_metrics",
    "get_fetcher",
    "get_judge",
    "load_config_file",
    "load_settings",
    "parse_document",
    "render_report",
    "run_ablation",
    "run_batch",
    "run_pipeline",
]
