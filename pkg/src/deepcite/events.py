"""Run events and the sinks that receive them.

The runner reports progress as small immutable events: a citation was
fetched, a pair was evaluated, a document or a batch finished.  Sinks are
optional; the runner works the same without one.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import StrEnum
from itertools import count
from pathlib import Path
from threading import Lock
from typing import Any, Mapping, Protocol

LOGGER = logging.getLogger(__name__)


class EventKind(StrEnum):
    CITATION_FETCHED = "citation_fetched"
    PAIR_EVALUATED = "pair_evaluated"
    DOCUMENT_COMPLETED = "document_completed"
    BATCH_COMPLETED = "batch_completed"


@dataclass(slots=True, frozen=True)
class RunEvent:
    """One progress event; ``sequence`` is assigned by the emitter."""

    kind: EventKind
    run_id: str
    payload: Mapping[str, Any] = field(default_factory=dict)
    sequence: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {"sequence": self.sequence, "kind": self.kind.value, "run_id": self.run_id, "payload": dict(self.payload)}


class EventSink(Protocol):
    """Contract implemented by event consumers."""

    def emit(self, event: RunEvent) -> None:
        """Receive ``event``; must not raise for ordinary I/O problems."""

    def close(self) -> None:
        """Flush and release held resources."""


class InMemoryEventSink:
    """Sink that keeps events in memory for tests and diagnostics."""

    def __init__(self) -> None:
        self._events: list[RunEvent] = []
        self._lock = Lock()

    @property
    def events(self) -> list[RunEvent]:
        with self._lock:
            return list(self._events)

    def of_kind(self, kind: EventKind) -> list[RunEvent]:
        return [event for event in self.events if event.kind is kind]

    def emit(self, event: RunEvent) -> None:
        with self._lock:
            self._events.append(event)

    def close(self) -> None:
        return None


class JsonLinesEventSink:
    """Append events to a JSON-lines file."""

    def __init__(self, path: Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("a", encoding="utf-8")
        self._lock = Lock()

    def emit(self, event: RunEvent) -> None:
        line = json.dumps(event.to_dict(), ensure_ascii=False, sort_keys=True)
        with self._lock:
            try:
                self._handle.write(line + "\n")
            except OSError:
                LOGGER.exception("Failed to write event %s to %s", event.kind.value, self.path)

    def close(self) -> None:
        with self._lock:
            self._handle.close()


class EventEmitter:
    """Stamp events with a run id and sequence number and hand them to a sink."""

    def __init__(self, sink: EventSink | None, run_id: str) -> None:
        self._sink = sink
        self.run_id = run_id
        self._sequence = count(1)

    def emit(self, kind: EventKind, **payload: Any) -> None:
        if self._sink is None:
            return
        event = RunEvent(kind=kind, run_id=self.run_id, payload=payload, sequence=next(self._sequence))
        try:
            self._sink.emit(event)
        except Exception:  # pragma: no cover - sinks must never break a run
            LOGGER.exception("Event sink rejected %s", kind.value)


__all__ = ["EventEmitter", "EventKind", "EventSink", "InMemoryEventSink", "JsonLinesEventSink", "RunEvent"]
