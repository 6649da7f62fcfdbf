"""On-disk layout of evaluation runs.

``<root>/<run_id>/<query_id>.document.json`` holds each completed document and
``<root>/<run_id>/manifest.json`` the configuration echo, timestamps and the
per-query records.  Documents serialize canonically, so rerunning over a replay
cache rewrites them with identical bytes; only the manifest timestamps change.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from collections.abc import Sequence
from dataclasses import dataclass
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

from deepcite.errors import DocumentFormatError
from deepcite.models import AttributionDocument, read_document, write_document
from deepcite.runner.batch import RunRecord
from deepcite.runner.pipeline import RunConfig

LOGGER = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
_UNSAFE = re.compile(r"[^A-Za-z0-9._-]+")


def safe_name(value: str) -> str:
    """File-system safe version of a run or query id."""

    cleaned = _UNSAFE.sub("_", value).strip("._")
    return cleaned or "unnamed"


def storage_name(value: str) -> str:
    """:func:`safe_name`, suffixed with a digest of ``value`` whenever cleaning changed it.

    Ids that clean to the same text, such as ``a/b`` and ``a b``, keep distinct files.
    """

    cleaned = safe_name(value)
    if cleaned == value:
        return cleaned
    return f"{cleaned}-{hashlib.sha256(value.encode('utf-8')).hexdigest()[:8]}"


@dataclass(slots=True, frozen=True)
class StoredRun:
    """A run read back from disk."""

    run_id: str
    manifest: dict[str, Any]
    records: list[RunRecord]

    @property
    def label(self) -> str:
        return str(self.manifest.get("label") or self.run_id)


class RunStore:
    """Read and write run directories under ``root``."""

    def __init__(self, root: Path) -> None:
        self.root = Path(root)

    def run_dir(self, run_id: str) -> Path:
        return self.root / storage_name(run_id)

    def document_path(self, run_id: str, query_id: str) -> Path:
        return self.run_dir(run_id) / f"{storage_name(query_id)}.document.json"

    def save_run(
        self,
        config: RunConfig,
        records: Sequence[RunRecord],
        *,
        started_at: datetime | None = None,
        finished_at: datetime | None = None,
        label: str | None = None,
    ) -> Path:
        """Write every record's document plus the run manifest; returns the run directory."""

        run_dir = self.run_dir(config.run_id)
        run_dir.mkdir(parents=True, exist_ok=True)
        entries = []
        for record in records:
            path = self.document_path(config.run_id, record.query_id)
            write_document(path, record.document)
            entries.append(
                {
                    "query_id": record.query_id,
                    "query": record.query,
                    "report_path": record.report_path,
                    "budget": record.budget,
                    "success": record.success,
                    "error": record.error,
                    "document": path.name,
                    "acquisition_attempts": record.acquisition_attempts,
                    "acquisition_ms": record.acquisition_ms,
                    "evaluation_ms": record.evaluation_ms,
                }
            )
        now = datetime.now(UTC)
        manifest = {
            "run_id": config.run_id,
            "label": label or config.run_id,
            "config": config.to_dict(),
            "started_at": (started_at or now).isoformat(),
            "finished_at": (finished_at or now).isoformat(),
            "records": entries,
        }
        (run_dir / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, ensure_ascii=False, default=str) + "\n", encoding="utf-8")
        LOGGER.info("Saved run %s with %s records to %s", config.run_id, len(entries), run_dir)
        return run_dir

    def list_runs(self) -> list[str]:
        """Run ids that have a manifest, sorted by name."""

        if not self.root.is_dir():
            return []
        return sorted(path.parent.name for path in self.root.glob(f"*/{MANIFEST_NAME}"))

    def load_run(self, run_id: str) -> StoredRun:
        """Load a run's manifest and documents.

        Raises:
            DocumentFormatError: If the manifest or a document cannot be decoded.
        """

        return load_run_dir(self.run_dir(run_id))


def load_run_dir(run_dir: Path) -> StoredRun:
    """Load the run stored in ``run_dir``."""

    manifest_path = Path(run_dir) / MANIFEST_NAME
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        msg = f"Cannot read run manifest {manifest_path}: {exc}"
        raise DocumentFormatError(msg) from exc
    records = []
    for entry in manifest.get("records", []):
        document_path = Path(run_dir) / entry["document"]
        try:
            document: AttributionDocument = read_document(document_path)
        except OSError as exc:
            msg = f"Cannot read run document {document_path}: {exc}"
            raise DocumentFormatError(msg) from exc
        records.append(
            RunRecord(
                query_id=entry["query_id"],
                query=entry.get("query", ""),
                document=document,
                report_path=entry.get("report_path"),
                budget=entry.get("budget"),
                error=entry.get("error"),
                acquisition_attempts=int(entry.get("acquisition_attempts", 0)),
                acquisition_ms=int(entry.get("acquisition_ms", 0)),
                evaluation_ms=int(entry.get("evaluation_ms", 0)),
            )
        )
    return StoredRun(run_id=str(manifest.get("run_id", Path(run_dir).name)), manifest=manifest, records=records)


__all__ = ["MANIFEST_NAME", "RunStore", "StoredRun", "load_run_dir", "safe_name", "storage_name"]
