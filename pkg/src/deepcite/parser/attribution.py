"""Backward attribution of sentence-final citations within one passage."""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence
from bisect import bisect_left
from dataclasses import dataclass

from deepcite.models import Attribution, Citation, MarkerKind, Span
from deepcite.parser.markers import ResolvedMarker
from deepcite.parser.registry import citation_index
from deepcite.parser.tree import InlineKind, lex_inlines

_TRAILING_AFTER_MARKER = re.compile(r"^[\s.,;:!?)\]\"'’”»]*$")
_SEPARATOR_BETWEEN_MARKERS = re.compile(r"^[\s,;]*$")
_SPACE_BEFORE_PUNCTUATION = re.compile(r"\s+([.,;:!?)\]])")
_SPACE_AFTER_OPENER = re.compile(r"([(\[])\s+")
_EMPTY_BRACKETS = re.compile(r"\(\s*[,;]?\s*\)|\[\s*\]")


@dataclass(slots=True, frozen=True)
class Sentence:
    """One sentence of a passage.

    ``text`` is the unmasked text of the sentence with markers still in place,
    ``offsets`` gives the canonical offset of each of its characters and
    ``span`` is its canonical span.
    """

    span: Span
    text: str
    offsets: tuple[int, ...]

    def local(self, span: Span) -> Span:
        """Map a canonical span inside the sentence to indices into ``text``."""

        return (bisect_left(self.offsets, span[0]), bisect_left(self.offsets, span[1]))


def backward_attribute(
    sentences: Sequence[Sentence],
    markers: Sequence[ResolvedMarker],
    registry: Sequence[Citation],
    *,
    passage_id: int,
    first_id: int = 1,
) -> list[Attribution]:
    """Attach citations to the sentences of one passage.

    A sentence with markers cites their resolved citations.  A marker that ends
    its sentence also covers every contiguous preceding sentence without
    markers of its own.  Any marker blocks propagation, resolved or not, and
    sentences left without citations, or with no text besides markers, produce no
    attribution.

    Args:
        sentences: Sentences of a single passage in document order.
        markers: Resolved markers located in the passage.
        registry: Citation registry the markers were deduplicated into.
        passage_id: Identifier of the enclosing block.
        first_id: Id given to the first attribution produced.
    """

    ids_by_url = citation_index(registry)
    per_sentence: list[list[ResolvedMarker]] = [[] for _ in sentences]
    for item in markers:
        for index, sentence in enumerate(sentences):
            if sentence.span[0] <= item.marker.span[0] and item.marker.span[1] <= sentence.span[1]:
                per_sentence[index].append(item)
                break

    assigned: list[list[int]] = [[] for _ in sentences]
    pending: list[int] = []
    for index, sentence in enumerate(sentences):
        own = per_sentence[index]
        if not own:
            pending.append(index)
            continue
        citation_ids = _dedupe(ids_by_url[item.url] for item in own if item.url is not None)
        assigned[index] = citation_ids
        final_ids = _dedupe(ids_by_url[item.url] for item in own if item.url is not None and _is_sentence_final(item, own, sentence))
        if final_ids:
            for waiting in pending:
                assigned[waiting] = final_ids
        pending = []

    attributions: list[Attribution] = []
    next_id = first_id
    for index, sentence in enumerate(sentences):
        if not assigned[index]:
            continue
        text_nocite = strip_markers(sentence, per_sentence[index])
        if not text_nocite:
            continue
        attributions.append(
            Attribution(
                id=next_id,
                text_nocite=text_nocite,
                span=sentence.span,
                citation_ids=tuple(assigned[index]),
                passage_id=passage_id,
            )
        )
        next_id += 1
    return attributions


def strip_markers(sentence: Sentence, markers: Sequence[ResolvedMarker]) -> str:
    """Return the sentence text with citation syntax removed and whitespace collapsed.

    Inline links keep their link text, minus any citation syntax nested in it;
    every other marker is deleted together with the separators between
    adjacent markers.
    """

    link_text = {item.marker.span: _plain_text(item.marker.label) for item in markers if item.marker.kind is MarkerKind.INLINE_LINK}
    edits: list[tuple[int, int, str]] = []
    for span in sorted({item.marker.span for item in markers}):
        start, end = sentence.local(span)
        replacement = link_text.get(span, "")
        if edits and not replacement and not edits[-1][2] and _SEPARATOR_BETWEEN_MARKERS.match(sentence.text[edits[-1][1] : start]):
            edits[-1] = (edits[-1][0], end, "")
            continue
        edits.append((start, end, replacement))
    pieces: list[str] = []
    cursor = 0
    for start, end, replacement in edits:
        pieces.append(sentence.text[cursor:start])
        pieces.append(replacement)
        cursor = end
    pieces.append(sentence.text[cursor:])
    text = _EMPTY_BRACKETS.sub("", "".join(pieces))
    text = " ".join(text.split())
    text = _SPACE_AFTER_OPENER.sub(r"\1", text)
    return _SPACE_BEFORE_PUNCTUATION.sub(r"\1", text)


def _plain_text(label: str) -> str:
    return "".join(label[start:end] for kind, start, end, _, _ in lex_inlines(label) if kind is InlineKind.TEXT)


def _is_sentence_final(item: ResolvedMarker, own: Sequence[ResolvedMarker], sentence: Sentence) -> bool:
    tail_start = sentence.local(item.marker.span)[1]
    tail = sentence.text[tail_start:]
    for other in sorted({marker.marker.span for marker in own}, reverse=True):
        start, end = sentence.local(other)
        if start >= tail_start:
            tail = tail[: start - tail_start] + tail[end - tail_start :]
    return bool(_TRAILING_AFTER_MARKER.match(tail))


def _dedupe(values: Iterable[int]) -> list[int]:
    ordered: list[int] = []
    for value in values:
        if value not in ordered:
            ordered.append(value)
    return ordered


__all__ = ["Sentence", "backward_attribute", "strip_markers"]
