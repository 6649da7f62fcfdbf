"""Command-line entry point: ``deepcite parse|evaluate|report|ablate``.

Exit codes are a stable scripting contract: 0 on success, 2 for usage or input
errors, 3 when every judge call failed because the backend was unreachable.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from collections.abc import Sequence
from dataclasses import replace
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

from deepcite.config import DeepciteSettings, load_config_file, load_settings, parse_budgets, parse_dimensions
from deepcite.errors import DeepciteError, DocumentFormatError
from deepcite.events import EventEmitter, JsonLinesEventSink
from deepcite.judges import JudgeBackend, get_judge
from deepcite.metrics import (
    MetricsReport,
    OutputFormat,
    ablation_table,
    build_metrics,
    coerce_format,
    metrics_from_documents,
    render_ablation,
    render_report,
    render_table,
)
from deepcite.models import AttributionDocument, Dimension, EvalFlag, read_document, write_document
from deepcite.parser import parse_document
from deepcite.runner import (
    CommandReportSource,
    FileReportSource,
    PipelineRunner,
    ReportSource,
    RunConfig,
    RunRecord,
    RunSpec,
    RunStore,
    StoredRun,
    load_run_dir,
    load_run_specs,
    run_ablation,
    run_batch,
)
from deepcite.runner.store import MANIFEST_NAME

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_JUDGE_UNAVAILABLE = 3

EVENTS_NAME = "events.jsonl"


class UsageError(DeepciteError):
    """Raised for bad command-line input; mapped to exit status 2."""


def _add_judge_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("judge")
    group.add_argument("--judge", choices=("heuristic", "scripted", "remote"), help="Judge backend")
    group.add_argument("--judge-script", type=Path, help="JSON file of scripted judge responses")
    group.add_argument("--judge-model", help="Model name for the remote judge")
    group.add_argument("--judge-provider", help="Chat model provider for the remote judge (default: openai)")
    group.add_argument("--judge-endpoint", help="Base URL of an OpenAI-compatible endpoint")
    group.add_argument(
        "--judge-key-env",
        help="Name of the environment variable holding the judge API key; keys are never passed as flags",
    )
    group.add_argument("--dims", help="Comma-separated dimensions: link, relevant, fact (default: all)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deepcite", description="Evaluate source attribution in Markdown research reports.")
    parser.add_argument("--config", type=Path, help="UTF-8 JSON config file")
    parser.add_argument("--workdir", type=Path, help="Directory that relative paths are resolved against")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Increase log verbosity (-v info, -vv debug)")
    parser.add_argument("--replay-dir", type=Path, help="Directory of recorded HTTP responses")
    parser.add_argument("--replay-mode", choices=("off", "record", "replay"), help="Record live fetches or replay them offline")
    parser.add_argument("--run-id", help="Run identifier used for the run directory")
    parser.add_argument("--runs-dir", type=Path, help="Root directory for run outputs (default: runs)")
    commands = parser.add_subparsers(dest="command", required=True)

    parse_cmd = commands.add_parser("parse", help="Parse a Markdown report into an attribution document")
    parse_cmd.add_argument("input", type=Path, help="Markdown report")
    parse_cmd.add_argument("--out", type=Path, help="Document JSON path (default: <input>.document.json)")

    evaluate_cmd = commands.add_parser("evaluate", help="Fetch sources and judge every citation-claim pair")
    sources = evaluate_cmd.add_mutually_exclusive_group(required=True)
    sources.add_argument("--doc", type=Path, action="append", help="Markdown report or parsed document JSON; repeatable")
    sources.add_argument("--manifest", type=Path, help="JSON list of queries with report paths")
    evaluate_cmd.add_argument("--reports-dir", type=Path, help="Directory of <query_id>.md reports for manifest entries")
    _add_judge_flags(evaluate_cmd)

    report_cmd = commands.add_parser("report", help="Aggregate completed runs into one table")
    report_cmd.add_argument("--runs", type=Path, help="Runs directory or a single run directory (default: runs dir)")
    report_cmd.add_argument("--format", default="markdown_table", help="json, markdown_table or csv")
    report_cmd.add_argument("--out", type=Path, help="Write the rendering here instead of standard output")

    ablate_cmd = commands.add_parser("ablate", help="Run the batch once per tool-call budget")
    ablate_cmd.add_argument("--queries", type=Path, required=True, help="JSON list of queries")
    ablate_cmd.add_argument("--budgets", help="Comma-separated tool-call budgets (default: 2,10,30,50,70,100,150)")
    ablate_cmd.add_argument("--agent-cmd", help="Report generator command; {query}, {budget} and {query_id} are substituted")
    ablate_cmd.add_argument("--reports-dir", type=Path, help="Directory of pre-generated <query_id>.md reports")
    ablate_cmd.add_argument("--out", type=Path, help="Directory for ablation.csv and ablation.md (default: the run directory)")
    _add_judge_flags(ablate_cmd)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _overrides(args: argparse.Namespace) -> dict[str, dict[str, Any]]:
    judge_backend = getattr(args, "judge", None)
    if judge_backend is None and getattr(args, "judge_script", None) is not None:
        judge_backend = "scripted"
    return {
        "output": {
            "workdir": args.workdir,
            "replay_dir": args.replay_dir,
            "replay_mode": args.replay_mode,
            "runs_dir": args.runs_dir,
        },
        "judge": {
            "backend": judge_backend,
            "script": getattr(args, "judge_script", None),
            "model": getattr(args, "judge_model", None),
            "provider": getattr(args, "judge_provider", None),
            "endpoint": getattr(args, "judge_endpoint", None),
            "api_key_env": getattr(args, "judge_key_env", None),
        },
        "runner": {
            "agent_command": getattr(args, "agent_cmd", None),
            "reports_dir": getattr(args, "reports_dir", None),
        },
    }


def _settings(args: argparse.Namespace) -> DeepciteSettings:
    config = load_config_file(args.config) if args.config is not None else None
    return load_settings(config, overrides=_overrides(args))


def _dimensions(args: argparse.Namespace, settings: DeepciteSettings) -> tuple[Dimension, ...]:
    return parse_dimensions(args.dims) if args.dims else settings.runner.dimensions


def _store(settings: DeepciteSettings) -> RunStore:
    return RunStore(settings.output.resolve(settings.output.runs_dir))


def _event_sink(store: RunStore, run_id: str) -> JsonLinesEventSink:
    path = store.run_dir(run_id) / EVENTS_NAME
    path.unlink(missing_ok=True)
    return JsonLinesEventSink(path)


def _write_reports(run_dir: Path, report: MetricsReport) -> None:
    for output in OutputFormat:
        (run_dir / f"report{output.suffix}").write_bytes(render_report(report, output))


def _judge_unreachable(documents: Sequence[AttributionDocument]) -> bool:
    """True when judge calls were attempted and every one gave up on transport errors."""

    judged = [
        result
        for document in documents
        for result in document.evals
        if result.dimension is not Dimension.LINK_WORKS and result.judge_attempts > 0
    ]
    return bool(judged) and all(EvalFlag.JUDGE_UNAVAILABLE in result.flags for result in judged)


def _summary(documents: Sequence[AttributionDocument]) -> str:
    citations = sum(len(document.citations) for document in documents)
    attributions = sum(len(document.attributions) for document in documents)
    pairs = sum(len(document.pairs()) for document in documents)
    return f"{citations} citations, {attributions} attributions, {pairs} citation-claim pairs"


def cmd_parse(args: argparse.Namespace, settings: DeepciteSettings) -> int:
    path = settings.output.resolve(args.input)
    try:
        raw = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        msg = f"Cannot read report {path}: {exc}"
        raise UsageError(msg) from exc
    document = parse_document(raw, origin=str(args.input))
    for warning in document.diagnostics.warnings:
        LOGGER.info("%s: %s", path, warning)
    out = settings.output.resolve(args.out) if args.out is not None else path.with_name(f"{path.stem}.document.json")
    write_document(out, document)
    print(f"{path}: {_summary([document])} -> {out}")
    return EXIT_OK


async def _evaluate_docs(paths: Sequence[Path], config: RunConfig, judge: JudgeBackend, sink: JsonLinesEventSink) -> list[RunRecord]:
    runner = PipelineRunner(config, judge=judge, events=EventEmitter(sink, config.run_id))
    records = []
    try:
        for path in paths:
            if path.suffix == ".json":
                document = await runner.evaluate_document(read_document(path))
            else:
                try:
                    raw = path.read_text(encoding="utf-8")
                except (OSError, UnicodeDecodeError) as exc:
                    msg = f"Cannot read report {path}: {exc}"
                    raise UsageError(msg) from exc
                document = await runner.run_pipeline(raw, origin=path.name)
            query_id = path.name.removesuffix(".json").removesuffix(".document").removesuffix(".md")
            records.append(RunRecord(query_id=query_id, query="", document=document, report_path=str(path)))
    finally:
        await runner.aclose()
    return records


def cmd_evaluate(args: argparse.Namespace, settings: DeepciteSettings) -> int:
    run_id = args.run_id or "run"
    config = settings.run_config(run_id, dimensions=_dimensions(args, settings))
    judge = get_judge(config.judge)
    store = _store(settings)
    sink = _event_sink(store, run_id)
    started = datetime.now(UTC)
    try:
        if args.manifest is not None:
            specs = load_run_specs(settings.output.resolve(args.manifest))
            reports_dir = settings.runner.reports_dir
            source = FileReportSource(settings.output.resolve(reports_dir) if reports_dir else None)
            records = asyncio.run(run_batch(specs, config, source=source, judge=judge, sink=sink))
        else:
            paths = [settings.output.resolve(path) for path in args.doc]
            records = asyncio.run(_evaluate_docs(paths, config, judge, sink))
    finally:
        sink.close()
    run_dir = store.save_run(config, records, started_at=started, finished_at=datetime.now(UTC))
    report = build_metrics(records, label=run_id, dimensions=config.dimensions)
    _write_reports(run_dir, report)
    documents = [record.document for record in records]
    print(f"{run_id}: {_summary(documents)} -> {run_dir}")
    print(render_report(report, OutputFormat.MARKDOWN_TABLE).decode("utf-8"), end="")
    if _judge_unreachable(documents):
        LOGGER.error("The judge backend was unreachable for every call in %s", run_id)
        return EXIT_JUDGE_UNAVAILABLE
    return EXIT_OK


def _load_runs(root: Path) -> list[StoredRun]:
    if (root / MANIFEST_NAME).is_file():
        return [load_run_dir(root)]
    store = RunStore(root)
    return [store.load_run(run_id) for run_id in store.list_runs()]


def _run_metrics(run: StoredRun) -> MetricsReport:
    names = run.manifest.get("config", {}).get("dimensions")
    dimensions = [Dimension(name) for name in names] if names else None
    if run.records:
        return build_metrics(run.records, label=run.label, dimensions=dimensions)
    return metrics_from_documents([], label=run.label, dimensions=dimensions)


def cmd_report(args: argparse.Namespace, settings: DeepciteSettings) -> int:
    fmt = coerce_format(args.format)
    root = settings.output.resolve(args.runs if args.runs is not None else settings.output.runs_dir)
    runs = _load_runs(root)
    if not runs:
        msg = f"No completed runs under {root}"
        raise UsageError(msg)
    rendered = render_table([_run_metrics(run) for run in runs], fmt)
    if args.out is not None:
        out = settings.output.resolve(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(rendered)
        print(f"Wrote {len(runs)} run(s) to {out}")
    else:
        print(rendered.decode("utf-8"), end="")
    return EXIT_OK


def _ablation_source(settings: DeepciteSettings, specs: Sequence[RunSpec]) -> ReportSource:
    if settings.runner.agent_command:
        return CommandReportSource(settings.runner.agent_command, timeout_s=settings.runner.agent_timeout_s)
    reports_dir = settings.runner.reports_dir
    if reports_dir is None and any(spec.report_path is None for spec in specs):
        msg = "ablate needs --agent-cmd, --reports-dir or a report_path for every query"
        raise UsageError(msg)
    return FileReportSource(settings.output.resolve(reports_dir) if reports_dir else None)


def cmd_ablate(args: argparse.Namespace, settings: DeepciteSettings) -> int:
    budgets = parse_budgets(args.budgets) if args.budgets else settings.runner.budgets
    run_id = args.run_id or "ablation"
    config = settings.run_config(run_id, dimensions=_dimensions(args, settings))
    specs = load_run_specs(settings.output.resolve(args.queries))
    source = _ablation_source(settings, specs)
    judge = get_judge(config.judge)
    store = _store(settings)
    sink = _event_sink(store, run_id)
    started = datetime.now(UTC)
    try:
        results = asyncio.run(run_ablation(specs, budgets, config, source=source, judge=judge, sink=sink))
    finally:
        sink.close()
    per_budget: dict[int, MetricsReport] = {}
    for budget, records in results.items():
        budget_config = replace(config, tool_call_budget=budget, run_id=f"{run_id}-b{budget}")
        run_dir = store.save_run(budget_config, records, started_at=started, finished_at=datetime.now(UTC))
        per_budget[budget] = build_metrics(records, label=budget_config.run_id, dimensions=config.dimensions)
        _write_reports(run_dir, per_budget[budget])
    rows = ablation_table(per_budget)
    out_dir = settings.output.resolve(args.out) if args.out is not None else store.run_dir(run_id)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "ablation.csv").write_bytes(render_ablation(rows, OutputFormat.CSV))
    markdown = render_ablation(rows, OutputFormat.MARKDOWN_TABLE)
    (out_dir / "ablation.md").write_bytes(markdown)
    print(markdown.decode("utf-8"), end="")
    documents = [record.document for records in results.values() for record in records]
    if _judge_unreachable(documents):
        LOGGER.error("The judge backend was unreachable for every call in %s", run_id)
        return EXIT_JUDGE_UNAVAILABLE
    return EXIT_OK


_COMMANDS = {"parse": cmd_parse, "evaluate": cmd_evaluate, "report": cmd_report, "ablate": cmd_ablate}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    _configure_logging(args.verbose)
    try:
        settings = _settings(args)
        return _COMMANDS[args.command](args, settings)
    except (UsageError, DocumentFormatError, ValueError, KeyError, OSError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"deepcite {args.command}: {message}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover - manual execution path
    sys.exit(main())
