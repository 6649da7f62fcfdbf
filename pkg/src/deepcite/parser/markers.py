"""Citation marker extraction and label resolution."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from deepcite.models import CitationMarker, MarkerKind
from deepcite.parser.tree import BlockKind, BlockNode, InlineKind, MarkdownTree
from deepcite.parser.urls import UrlRejectedError, normalize_url

LOGGER = logging.getLogger(__name__)

MAX_RANGE_SIZE = 100

_RANGE_PART = re.compile(r"^\s*(?P<first>\d+)\s*(?:[-–]\s*(?P<last>\d+))?\s*$")
_LEADING_NUMBER = re.compile(r"^\s*\[(?P<number>\d+)\]")
_LABEL_WHITESPACE = re.compile(r"\s+")


@dataclass(slots=True, frozen=True)
class ResolvedMarker:
    """A marker together with the normalized URL it points at.

    ``url`` is ``None`` for unresolved markers; ``reason`` then says why.
    """

    marker: CitationMarker
    url: str | None
    raw_url: str | None = None
    reason: str | None = None

    @property
    def resolved(self) -> bool:
        return self.url is not None


def extract_citation_markers(tree: MarkdownTree, *, warnings: list[str] | None = None) -> list[CitationMarker]:
    """Collect citation markers from passage text in document order.

    Headings, definitions and blocks under a references-style heading are not
    scanned.  Numbered ranges and comma lists are expanded into one marker per
    label, all sharing the bracket's span.

    Args:
        tree: Tree produced by :func:`~deepcite.parser.tree.build_ast`.
        warnings: Optional list receiving parse warnings such as descending ranges.
    """

    sink = warnings if warnings is not None else []
    markers: list[CitationMarker] = []
    for block in tree.passage_blocks():
        for node in block.inlines:
            if node.kind is InlineKind.NUMBERED_REF:
                markers.extend(
                    CitationMarker(kind=MarkerKind.NUMBERED, label=label, span=node.span)
                    for label in expand_numbered(node.label, offset=node.span[0], warnings=sink)
                )
            elif node.kind is InlineKind.FOOTNOTE_REF:
                markers.append(CitationMarker(kind=MarkerKind.FOOTNOTE, label=f"^{node.label}", span=node.span))
            elif node.kind is InlineKind.LINK:
                markers.append(CitationMarker(kind=MarkerKind.INLINE_LINK, label=node.label, span=node.span, url=node.url))
            elif node.kind is InlineKind.AUTOLINK:
                markers.append(CitationMarker(kind=MarkerKind.AUTOLINK, label=node.label, span=node.span, url=node.url))
    return markers


def expand_numbered(body: str, *, offset: int = 0, warnings: list[str] | None = None) -> list[str]:
    """Expand the body of a numbered bracket (``"1-3, 5"``) into decimal labels."""

    labels: list[str] = []
    for part in body.split(","):
        match = _RANGE_PART.match(part)
        if match is None:
            continue
        first = int(match.group("first"))
        if match.group("last") is None:
            labels.append(str(first))
            continue
        last = int(match.group("last"))
        if first > last:
            if warnings is not None:
                warnings.append(f"descending citation range [{first}-{last}] at offset {offset}; kept endpoints only")
            labels.extend([str(first), str(last)])
        elif last - first + 1 > MAX_RANGE_SIZE:
            if warnings is not None:
                warnings.append(f"citation range [{first}-{last}] at offset {offset} exceeds {MAX_RANGE_SIZE} labels; kept endpoints only")
            labels.extend([str(first), str(last)])
        else:
            labels.extend(str(number) for number in range(first, last + 1))
    return labels


def _label_key(label: str) -> str:
    return _LABEL_WHITESPACE.sub(" ", label.strip()).casefold()


@dataclass(slots=True)
class _ReferenceTables:
    definitions: dict[str, str]
    reference_list: dict[str, str]
    reference_entries: dict[str, str]
    footnotes: dict[str, str]

    @classmethod
    def from_tree(cls, tree: MarkdownTree) -> _ReferenceTables:
        definitions: dict[str, str] = {}
        reference_list: dict[str, str] = {}
        reference_entries: dict[str, str] = {}
        footnotes: dict[str, str] = {}
        for block in tree.walk():
            if block.kind is BlockKind.REFERENCE_DEFINITION and block.url:
                definitions.setdefault(_label_key(block.label), block.url)
            elif block.kind is BlockKind.FOOTNOTE_DEFINITION and block.url:
                footnotes.setdefault(_label_key(block.label), block.url)
            elif block.in_references and block.kind is BlockKind.LIST_ITEM:
                urls = block.urls()
                if len(urls) != 1:
                    continue
                if block.ordered and block.label.isdecimal():
                    reference_list.setdefault(str(int(block.label)), urls[0])
                _collect_entry(block, urls[0], reference_entries)
            elif block.in_references and block.kind is BlockKind.PARAGRAPH:
                urls = block.urls()
                if len(urls) == 1:
                    _collect_entry(block, urls[0], reference_entries)
        return cls(definitions, reference_list, reference_entries, footnotes)

    def lookup_numbered(self, label: str) -> str | None:
        return self.definitions.get(_label_key(label)) or self.reference_list.get(label) or self.reference_entries.get(label)

    def lookup_footnote(self, label: str) -> str | None:
        return self.footnotes.get(_label_key(label.removeprefix("^"))) or self.definitions.get(_label_key(label))


def _collect_entry(block: BlockNode, url: str, entries: dict[str, str]) -> None:
    match = _LEADING_NUMBER.match(block.text)
    if match is not None:
        entries.setdefault(str(int(match.group("number"))), url)


def resolve_references(markers: list[CitationMarker], tree: MarkdownTree) -> list[ResolvedMarker]:
    """Resolve each marker to a normalized URL.

    Numbered labels are looked up in link reference definitions first, then in
    ordered lists under a references-style heading, then in references entries
    that start with ``[n]``.  Footnotes resolve to the first URL of their
    definition.  Inline links and autolinks carry their own URL.
    """

    tables = _ReferenceTables.from_tree(tree)
    resolved: list[ResolvedMarker] = []
    for marker in markers:
        if marker.kind is MarkerKind.NUMBERED:
            raw_url = tables.lookup_numbered(marker.label)
        elif marker.kind is MarkerKind.FOOTNOTE:
            raw_url = tables.lookup_footnote(marker.label)
        else:
            raw_url = marker.url
        if raw_url is None:
            resolved.append(ResolvedMarker(marker=marker, url=None, reason="unresolved label"))
            continue
        try:
            url = normalize_url(raw_url)
        except UrlRejectedError as exc:
            LOGGER.debug("Rejected citation URL for label %r: %s", marker.label, exc)
            resolved.append(ResolvedMarker(marker=marker, url=None, raw_url=raw_url, reason="rejected url"))
            continue
        resolved.append(ResolvedMarker(marker=marker, url=url, raw_url=raw_url))
    return resolved


__all__ = [
    "MAX_RANGE_SIZE",
    "ResolvedMarker",
    "expand_numbered",
    "extract_citation_markers",
    "resolve_references",
]
