"""Deterministic Markdown citation parsing."""

from __future__ import annotations

from deepcite.parser.attribution import Sentence, backward_attribute, strip_markers
from deepcite.parser.canonical import MASK_FILLER, MaskResult, canonicalize, mask_code
from deepcite.parser.document import parse_document
from deepcite.parser.markers import ResolvedMarker, expand_numbered, extract_citation_markers, resolve_references
from deepcite.parser.registry import build_registry
from deepcite.parser.sentences import ABBREVIATIONS, segment_sentences
from deepcite.parser.tree import BlockKind, BlockNode, InlineKind, InlineNode, MarkdownTree, build_ast
from deepcite.parser.urls import UrlRejectedError, normalize_url

__all__ = [
    "ABBREVIATIONS",
    "MASK_FILLER",
    "BlockKind",
    "BlockNode",
    "InlineKind",
    "InlineNode",
    "MarkdownTree",
    "MaskResult",
    "ResolvedMarker",
    "Sentence",
    "UrlRejectedError",
    "backward_attribute",
    "build_ast",
    "build_registry",
    "canonicalize",
    "expand_numbered",
    "extract_citation_markers",
    "mask_code",
    "normalize_url",
    "parse_document",
    "resolve_references",
    "segment_sentences",
    "strip_markers",
]
