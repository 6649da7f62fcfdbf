"""Evaluation runs: single reports, batches and the search-depth ablation."""

from __future__ import annotations

from deepcite.runner.batch import DEFAULT_BUDGETS, RunRecord, run_ablation, run_batch
from deepcite.runner.pipeline import PipelineRunner, RunConfig, run_pipeline
from deepcite.runner.sources import CommandReportSource, FileReportSource, ReportSource, RunSpec, load_run_specs
from deepcite.runner.store import RunStore, StoredRun, load_run_dir

__all__ = [
    "DEFAULT_BUDGETS",
    "CommandReportSource",
    "FileReportSource",
    "PipelineRunner",
    "ReportSource",
    "RunConfig",
    "RunRecord",
    "RunSpec",
    "RunStore",
    "StoredRun",
    "load_run_dir",
    "load_run_specs",
    "run_ablation",
    "run_batch",
    "run_pipeline",
]
