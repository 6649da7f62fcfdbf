"""Domain types for attribution documents and their JSON encoding.

An :class:`AttributionDocument` is the unit that flows through the whole
pipeline: the parser fills in citations and attributions, the runner attaches
fetch outcomes and evaluation results, and the metrics layer reads it back.
The JSON encoding is canonical so equal documents serialize to equal bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import StrEnum
from pathlib import Path
from typing import Any, Mapping

from deepcite.errors import DocumentFormatError
from deepcite.fetch.base import ContentFlag, FetchCategory, FetchOutcome

SCHEMA_VERSION = 1

Span = tuple[int, int]


class MarkerKind(StrEnum):
    """Syntactic form of a citation marker."""

    NUMBERED = "numbered"
    FOOTNOTE = "footnote"
    INLINE_LINK = "inline_link"
    AUTOLINK = "autolink"


class Dimension(StrEnum):
    """Evaluation dimensions, in reporting order."""

    LINK_WORKS = "link_works"
    RELEVANT_CONTENT = "relevant_content"
    FACT_CHECK = "fact_check"

    @property
    def rank(self) -> int:
        return ALL_DIMENSIONS.index(self)


ALL_DIMENSIONS: tuple[Dimension, ...] = (Dimension.LINK_WORKS, Dimension.RELEVANT_CONTENT, Dimension.FACT_CHECK)


class EvalFlag(StrEnum):
    """Annotations explaining how an evaluation result came about."""

    RATE_LIMITED_SOURCE = "rate_limited_source"
    FETCH_FAILED = "fetch_failed"
    JUDGE_PARSE_RETRY = "judge_parse_retry"
    JUDGE_UNAVAILABLE = "judge_unavailable"


@dataclass(slots=True, frozen=True)
class SourceDocument:
    """The report as received and in canonical form."""

    raw_text: str
    canonical_text: str
    origin: str = "inline"


@dataclass(slots=True, frozen=True)
class CitationMarker:
    """One citation marker found in the canonical text."""

    kind: MarkerKind
    label: str
    span: Span
    url: str | None = None

    def __post_init__(self) -> None:
        if self.span[0] >= self.span[1]:
            msg = f"marker span {self.span} is empty"
            raise ValueError(msg)
        if self.kind is MarkerKind.NUMBERED and not self.label.isdecimal():
            msg = f"numbered marker label {self.label!r} is not a decimal number"
            raise ValueError(msg)


@dataclass(slots=True, frozen=True)
class Citation:
    """A deduplicated cited source."""

    id: int
    url: str
    raw_labels: tuple[str, ...]
    fetch_outcome: FetchOutcome | None = None

    def __post_init__(self) -> None:
        if self.id < 1:
            msg = "Citation.id must be at least 1"
            raise ValueError(msg)
        if not self.raw_labels:
            msg = "Citation.raw_labels must not be empty"
            raise ValueError(msg)

    @property
    def url_content(self) -> str | None:
        """Extracted text of the source, available after a successful fetch."""

        return self.fetch_outcome.content if self.fetch_outcome is not None else None


@dataclass(slots=True, frozen=True)
class Attribution:
    """A sentence-level claim and the citations supporting it."""

    id: int
    text_nocite: str
    span: Span
    citation_ids: tuple[int, ...]
    passage_id: int

    def __post_init__(self) -> None:
        if not self.citation_ids:
            msg = "Attribution.citation_ids must not be empty"
            raise ValueError(msg)


@dataclass(slots=True, frozen=True)
class EvalResult:
    """Verdict for one (attribution, citation, dimension) triple.

    ``score`` is ``None`` when the dimension could not be evaluated.
    """

    attribution_id: int
    citation_id: int
    dimension: Dimension
    score: int | None
    explanation: str = ""
    judge_attempts: int = 0
    flags: frozenset[EvalFlag] = frozenset()
    fetch_category: str | None = None

    def __post_init__(self) -> None:
        if self.score not in (0, 1, None):
            msg = f"EvalResult.score must be 0, 1 or None, got {self.score!r}"
            raise ValueError(msg)
        if self.dimension is Dimension.LINK_WORKS and self.score is None:
            msg = "link_works results are always evaluated"
            raise ValueError(msg)

    @property
    def evaluated(self) -> bool:
        return self.score is not None

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (self.attribution_id, self.citation_id, self.dimension.rank)


@dataclass(slots=True, frozen=True)
class ParseDiagnostics:
    """Non-fatal findings recorded while parsing a report."""

    warnings: tuple[str, ...] = ()
    unresolved_labels: tuple[str, ...] = ()
    rejected_urls: tuple[str, ...] = ()
    uncited_sentences: int = 0
    marker_count: int = 0
    masked_spans: tuple[Span, ...] = ()


@dataclass(slots=True, frozen=True)
class AttributionDocument:
    """Citations, attributions and evaluation results for one report."""

    source: SourceDocument
    citations: tuple[Citation, ...] = ()
    attributions: tuple[Attribution, ...] = ()
    evals: tuple[EvalResult, ...] = ()
    diagnostics: ParseDiagnostics = field(default_factory=ParseDiagnostics)

    def citation(self, citation_id: int) -> Citation:
        for citation in self.citations:
            if citation.id == citation_id:
                return citation
        msg = f"Unknown citation id {citation_id}"
        raise KeyError(msg)

    def attribution(self, attribution_id: int) -> Attribution:
        for attribution in self.attributions:
            if attribution.id == attribution_id:
                return attribution
        msg = f"Unknown attribution id {attribution_id}"
        raise KeyError(msg)

    def pairs(self) -> list[tuple[Attribution, Citation]]:
        """Return every citation-claim pair ordered by (attribution id, citation id)."""

        by_id = {citation.id: citation for citation in self.citations}
        ordered: list[tuple[Attribution, Citation]] = []
        for attribution in sorted(self.attributions, key=lambda item: item.id):
            for citation_id in sorted(set(attribution.citation_ids)):
                ordered.append((attribution, by_id[citation_id]))
        return ordered

    @property
    def has_pairs(self) -> bool:
        return bool(self.attributions)

    def with_citations(self, citations: tuple[Citation, ...]) -> AttributionDocument:
        return replace(self, citations=citations)

    def with_evals(self, evals: tuple[EvalResult, ...] | list[EvalResult]) -> AttributionDocument:
        """Return a copy holding ``evals`` in canonical order."""

        ordered = tuple(sorted(evals, key=lambda result: result.sort_key))
        pair_ids = {(attribution.id, citation.id) for attribution, citation in self.pairs()}
        for result in ordered:
            if (result.attribution_id, result.citation_id) not in pair_ids:
                msg = f"EvalResult references unknown pair ({result.attribution_id}, {result.citation_id})"
                raise ValueError(msg)
        return replace(self, evals=ordered)


# JSON encoding ------------------------------------------------------------


def _outcome_to_dict(outcome: FetchOutcome) -> dict[str, Any]:
    return {
        "category": outcome.category.value,
        "http_status": outcome.http_status,
        "attempts": outcome.attempts,
        "elapsed_ms": outcome.elapsed_ms,
        "final_url": outcome.final_url,
        "content_type": outcome.content_type,
        "flags": sorted(flag.value for flag in outcome.flags),
    }


def _outcome_from_dict(payload: Mapping[str, Any], content: str | None) -> FetchOutcome:
    return FetchOutcome(
        category=FetchCategory(payload["category"]),
        http_status=payload.get("http_status"),
        attempts=int(payload["attempts"]),
        elapsed_ms=int(payload["elapsed_ms"]),
        content=content,
        final_url=payload.get("final_url"),
        content_type=payload.get("content_type"),
        flags=frozenset(ContentFlag(flag) for flag in payload.get("flags", ())),
    )


def eval_to_dict(result: EvalResult) -> dict[str, Any]:
    return {
        "attribution_id": result.attribution_id,
        "citation_id": result.citation_id,
        "dimension": result.dimension.value,
        "score": "not_evaluated" if result.score is None else result.score,
        "explanation": result.explanation,
        "judge_attempts": result.judge_attempts,
        "flags": sorted(flag.value for flag in result.flags),
        "fetch_category": result.fetch_category,
    }


def eval_from_dict(payload: Mapping[str, Any]) -> EvalResult:
    score = payload["score"]
    return EvalResult(
        attribution_id=int(payload["attribution_id"]),
        citation_id=int(payload["citation_id"]),
        dimension=Dimension(payload["dimension"]),
        score=None if score == "not_evaluated" else int(score),
        explanation=str(payload.get("explanation", "")),
        judge_attempts=int(payload.get("judge_attempts", 0)),
        flags=frozenset(EvalFlag(flag) for flag in payload.get("flags", ())),
        fetch_category=payload.get("fetch_category"),
    )


def document_to_dict(document: AttributionDocument) -> dict[str, Any]:
    """Encode ``document`` as a JSON-compatible mapping."""

    diagnostics = document.diagnostics
    return {
        "schema": SCHEMA_VERSION,
        "source": {
            "origin": document.source.origin,
            "raw_text": document.source.raw_text,
            "canonical_text": document.source.canonical_text,
        },
        "citations": [
            {
                "id": citation.id,
                "url": citation.url,
                "raw_labels": list(citation.raw_labels),
                "url_content": citation.url_content,
                "fetch_outcome": None if citation.fetch_outcome is None else _outcome_to_dict(citation.fetch_outcome),
            }
            for citation in document.citations
        ],
        "attributions": [
            {
                "id": attribution.id,
                "text_nocite": attribution.text_nocite,
                "span": list(attribution.span),
                "citation_ids": list(attribution.citation_ids),
                "passage_id": attribution.passage_id,
            }
            for attribution in document.attributions
        ],
        "evals": [eval_to_dict(result) for result in document.evals],
        "diagnostics": {
            "warnings": list(diagnostics.warnings),
            "unresolved_labels": list(diagnostics.unresolved_labels),
            "rejected_urls": list(diagnostics.rejected_urls),
            "uncited_sentences": diagnostics.uncited_sentences,
            "marker_count": diagnostics.marker_count,
            "masked_spans": [list(span) for span in diagnostics.masked_spans],
        },
    }


def document_from_dict(payload: Mapping[str, Any]) -> AttributionDocument:
    """Decode a mapping produced by :func:`document_to_dict`.

    Raises:
        DocumentFormatError: If the schema version is unsupported or fields are missing.
    """

    if payload.get("schema") != SCHEMA_VERSION:
        msg = f"Unsupported document schema {payload.get('schema')!r}; expected {SCHEMA_VERSION}"
        raise DocumentFormatError(msg)
    try:
        source_payload = payload["source"]
        source = SourceDocument(
            raw_text=source_payload["raw_text"],
            canonical_text=source_payload["canonical_text"],
            origin=source_payload.get("origin", "inline"),
        )
        citations = tuple(
            Citation(
                id=int(item["id"]),
                url=item["url"],
                raw_labels=tuple(item["raw_labels"]),
                fetch_outcome=None
                if item.get("fetch_outcome") is None
                else _outcome_from_dict(item["fetch_outcome"], item.get("url_content")),
            )
            for item in payload["citations"]
        )
        attributions = tuple(
            Attribution(
                id=int(item["id"]),
                text_nocite=item["text_nocite"],
                span=(int(item["span"][0]), int(item["span"][1])),
                citation_ids=tuple(int(value) for value in item["citation_ids"]),
                passage_id=int(item["passage_id"]),
            )
            for item in payload["attributions"]
        )
        evals = tuple(eval_from_dict(item) for item in payload.get("evals", ()))
        diagnostics_payload = payload.get("diagnostics") or {}
        diagnostics = ParseDiagnostics(
            warnings=tuple(diagnostics_payload.get("warnings", ())),
            unresolved_labels=tuple(diagnostics_payload.get("unresolved_labels", ())),
            rejected_urls=tuple(diagnostics_payload.get("rejected_urls", ())),
            uncited_sentences=int(diagnostics_payload.get("uncited_sentences", 0)),
            marker_count=int(diagnostics_payload.get("marker_count", 0)),
            masked_spans=tuple((int(start), int(end)) for start, end in diagnostics_payload.get("masked_spans", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        msg = f"Malformed attribution document: {exc}"
        raise DocumentFormatError(msg) from exc
    return AttributionDocument(
        source=source,
        citations=citations,
        attributions=attributions,
        evals=evals,
        diagnostics=diagnostics,
    )


def document_to_json(document: AttributionDocument) -> str:
    """Serialize ``document`` to canonical JSON text."""

    return json.dumps(document_to_dict(document), indent=2, ensure_ascii=False) + "\n"


def document_from_json(text: str) -> AttributionDocument:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        msg = f"Document is not valid JSON: {exc}"
        raise DocumentFormatError(msg) from exc
    if not isinstance(payload, Mapping):
        msg = "Document JSON must be an object"
        raise DocumentFormatError(msg)
    return document_from_dict(payload)


def write_document(path: Path, document: AttributionDocument) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document_to_json(document), encoding="utf-8")


def read_document(path: Path) -> AttributionDocument:
    return document_from_json(path.read_text(encoding="utf-8"))


__all__ = [
    "ALL_DIMENSIONS",
    "SCHEMA_VERSION",
    "Attribution",
    "AttributionDocument",
    "Citation",
    "CitationMarker",
    "Dimension",
    "EvalFlag",
    "EvalResult",
    "MarkerKind",
    "ParseDiagnostics",
    "SourceDocument",
    "Span",
    "document_from_dict",
    "document_from_json",
    "document_to_dict",
    "document_to_json",
    "eval_from_dict",
    "eval_to_dict",
    "read_document",
    "write_document",
]
