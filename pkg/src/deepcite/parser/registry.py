"""Citation registry building."""

from __future__ import annotations

from collections.abc import Iterable

from deepcite.models import Citation
from deepcite.parser.markers import ResolvedMarker


def build_registry(resolved: Iterable[ResolvedMarker]) -> list[Citation]:
    """Deduplicate resolved markers into citations numbered by first appearance.

    Unresolved markers are skipped.  Every distinct label that mapped to a URL
    is kept in ``raw_labels`` in the order it was first seen.
    """

    labels: dict[str, list[str]] = {}
    for item in resolved:
        if item.url is None:
            continue
        seen = labels.setdefault(item.url, [])
        if item.marker.label not in seen:
            seen.append(item.marker.label)
    return [Citation(id=index, url=url, raw_labels=tuple(url_labels)) for index, (url, url_labels) in enumerate(labels.items(), start=1)]


def citation_index(citations: Iterable[Citation]) -> dict[str, int]:
    """Map normalized URLs to citation ids."""

    return {citation.url: citation.id for citation in citations}


__all__ = ["build_registry", "citation_index"]
