"""Parse a Markdown report into an :class:`~deepcite.models.AttributionDocument`."""

from __future__ import annotations

import logging
from collections.abc import Iterable

from deepcite.models import Attribution, AttributionDocument, ParseDiagnostics, SourceDocument
from deepcite.parser.attribution import Sentence, backward_attribute
from deepcite.parser.canonical import canonicalize, mask_code
from deepcite.parser.markers import ResolvedMarker, extract_citation_markers, resolve_references
from deepcite.parser.registry import build_registry
from deepcite.parser.sentences import segment_sentences
from deepcite.parser.tree import BlockNode, build_ast

LOGGER = logging.getLogger(__name__)


def parse_document(raw: str, *, origin: str = "inline") -> AttributionDocument:
    """Run the full parsing pipeline over ``raw`` Markdown.

    Parsing never raises.  Equal inputs give equal documents, and a document
    that cannot be processed comes back empty with a warning in its
    diagnostics.
    """

    canonical = canonicalize(raw)
    source = SourceDocument(raw_text=raw, canonical_text=canonical, origin=origin)
    try:
        return _parse(source)
    except Exception as exc:  # pragma: no cover - parser failures are reported as diagnostics
        LOGGER.exception("Failed to parse report %s", origin)
        return AttributionDocument(source=source, diagnostics=ParseDiagnostics(warnings=(f"parser failure: {exc}",)))


def _parse(source: SourceDocument) -> AttributionDocument:
    canonical = source.canonical_text
    masked = mask_code(canonical)
    warnings = list(masked.warnings)
    tree = build_ast(masked.text)
    markers = extract_citation_markers(tree, warnings=warnings)
    resolved = resolve_references(markers, tree)
    citations = build_registry(resolved)

    attributions: list[Attribution] = []
    sentence_count = 0
    for passage_id, blocks in _passages(tree.passage_blocks()):
        sentences = [sentence for block in blocks for sentence in _sentences(block, canonical)]
        sentence_count += len(sentences)
        passage_markers = [item for item in resolved if _inside_any(item, sentences)]
        attributions.extend(
            backward_attribute(sentences, passage_markers, citations, passage_id=passage_id, first_id=len(attributions) + 1)
        )

    diagnostics = ParseDiagnostics(
        warnings=tuple(warnings),
        unresolved_labels=_unique(item.marker.label for item in resolved if item.url is None and item.raw_url is None),
        rejected_urls=_unique(item.raw_url for item in resolved if item.url is None and item.raw_url is not None),
        uncited_sentences=sentence_count - len(attributions),
        marker_count=len(markers),
        masked_spans=masked.spans,
    )
    LOGGER.debug(
        "Parsed %s: %s markers, %s citations, %s attributions",
        source.origin,
        len(markers),
        len(citations),
        len(attributions),
    )
    return AttributionDocument(source=source, citations=tuple(citations), attributions=tuple(attributions), diagnostics=diagnostics)


def _passages(blocks: list[BlockNode]) -> list[tuple[int, list[BlockNode]]]:
    grouped: dict[int, list[BlockNode]] = {}
    for block in blocks:
        if block.passage_id is not None:
            grouped.setdefault(block.passage_id, []).append(block)
    return list(grouped.items())


def _sentences(block: BlockNode, canonical: str) -> list[Sentence]:
    if not block.text or len(block.offsets) != len(block.text):
        return []
    unmasked = "".join(canonical[offset] for offset in block.offsets)
    return [
        Sentence(span=block.canonical_span(start, end), text=unmasked[start:end], offsets=block.offsets[start:end])
        for start, end in segment_sentences(block.text)
    ]


def _inside_any(item: ResolvedMarker, sentences: list[Sentence]) -> bool:
    start, end = item.marker.span
    return any(sentence.span[0] <= start and end <= sentence.span[1] for sentence in sentences)


def _unique(values: Iterable[str | None]) -> tuple[str, ...]:
    ordered: list[str] = []
    for value in values:
        if value is not None and value not in ordered:
            ordered.append(value)
    return tuple(ordered)


__all__ = ["parse_document"]
