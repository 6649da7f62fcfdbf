"""Report acquisition: pre-generated files or an external generator command."""

from __future__ import annotations

import asyncio
import json
import logging
import shlex
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from deepcite.errors import ConfigurationError, ReportNotFoundError, ReportSourceError

LOGGER = logging.getLogger(__name__)

_PLACEHOLDERS = ("{query}", "{budget}", "{query_id}")


@dataclass(slots=True, frozen=True)
class RunSpec:
    """One query to run and where its report comes from."""

    query_id: str
    query: str = ""
    report_path: Path | None = None

    def __post_init__(self) -> None:
        if not self.query_id.strip():
            msg = "RunSpec.query_id must be a non-empty string"
            raise ValueError(msg)


class ReportSource(Protocol):
    """Produces the Markdown report for a query."""

    async def acquire(self, spec: RunSpec, budget: int | None) -> str:
        """Return the report text or raise :class:`ReportSourceError`."""


class FileReportSource:
    """Load pre-generated reports.

    A spec's own ``report_path`` wins; otherwise ``<reports_dir>/<query_id>.md``.
    """

    def __init__(self, reports_dir: Path | None = None) -> None:
        self.reports_dir = Path(reports_dir) if reports_dir is not None else None

    def path_for(self, spec: RunSpec) -> Path:
        if spec.report_path is not None:
            return spec.report_path
        if self.reports_dir is None:
            msg = f"No report path for query {spec.query_id!r} and no reports directory configured"
            raise ReportNotFoundError(msg)
        return self.reports_dir / f"{spec.query_id}.md"

    async def acquire(self, spec: RunSpec, budget: int | None) -> str:  # noqa: ARG002
        path = self.path_for(spec)
        try:
            return await asyncio.to_thread(path.read_text, encoding="utf-8")
        except FileNotFoundError as exc:
            msg = f"Report file {path} does not exist"
            raise ReportNotFoundError(msg) from exc
        except (OSError, UnicodeDecodeError) as exc:
            msg = f"Cannot read report file {path}: {exc}"
            raise ReportSourceError(msg) from exc


class CommandReportSource:
    """Run an external research-agent command and capture its standard output.

    The template is split like a shell command line, then ``{query}``,
    ``{budget}`` and ``{query_id}`` are substituted inside each argument, so
    query text never needs quoting.  No shell is involved.
    """

    def __init__(self, template: str, *, timeout_s: float | None = None) -> None:
        if not template.strip():
            msg = "Agent command template must not be empty"
            raise ConfigurationError(msg)
        try:
            self._argv = shlex.split(template)
        except ValueError as exc:
            msg = f"Malformed agent command template: {exc}"
            raise ConfigurationError(msg) from exc
        self.template = template
        self.timeout_s = timeout_s

    def command(self, spec: RunSpec, budget: int | None) -> list[str]:
        values = {"{query}": spec.query, "{budget}": "" if budget is None else str(budget), "{query_id}": spec.query_id}
        argv = []
        for argument in self._argv:
            for placeholder in _PLACEHOLDERS:
                argument = argument.replace(placeholder, values[placeholder])
            argv.append(argument)
        return argv

    async def acquire(self, spec: RunSpec, budget: int | None) -> str:
        argv = self.command(spec, budget)
        LOGGER.info("Generating report for %s with budget %s", spec.query_id, budget)
        try:
            process = await asyncio.create_subprocess_exec(*argv, stdout=asyncio.subprocess.PIPE, stderr=asyncio.subprocess.PIPE)
        except OSError as exc:
            msg = f"Cannot start agent command {argv[0]!r}: {exc}"
            raise ReportSourceError(msg) from exc
        try:
            stdout, stderr = await asyncio.wait_for(process.communicate(), timeout=self.timeout_s)
        except TimeoutError as exc:
            process.kill()
            await process.wait()
            msg = f"Agent command timed out after {self.timeout_s}s for {spec.query_id}"
            raise ReportSourceError(msg) from exc
        if process.returncode != 0:
            tail = stderr.decode("utf-8", errors="replace").strip()[-500:]
            msg = f"Agent command exited with status {process.returncode} for {spec.query_id}: {tail}"
            raise ReportSourceError(msg)
        return stdout.decode("utf-8", errors="replace")


def load_run_specs(path: Path) -> list[RunSpec]:
    """Read a run manifest: a JSON list (or ``{"queries": [...]}``) of query entries.

    Relative ``report_path`` values are resolved against the manifest's directory.

    Raises:
        ConfigurationError: If the manifest is unreadable or malformed.
    """

    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        msg = f"Cannot read run manifest {path}: {exc}"
        raise ConfigurationError(msg) from exc
    entries = payload.get("queries") if isinstance(payload, dict) else payload
    if not isinstance(entries, list) or not entries:
        msg = f"Run manifest {path} must list at least one query"
        raise ConfigurationError(msg)
    specs: list[RunSpec] = []
    for index, entry in enumerate(entries):
        if not isinstance(entry, dict) or not entry.get("query_id"):
            msg = f"Run manifest entry {index} needs a 'query_id'"
            raise ConfigurationError(msg)
        report_path = entry.get("report_path")
        resolved = None
        if report_path:
            resolved = Path(report_path)
            if not resolved.is_absolute():
                resolved = path.parent / resolved
        specs.append(RunSpec(query_id=str(entry["query_id"]), query=str(entry.get("query", "")), report_path=resolved))
    return specs


__all__ = ["CommandReportSource", "FileReportSource", "ReportSource", "RunSpec", "load_run_specs"]
