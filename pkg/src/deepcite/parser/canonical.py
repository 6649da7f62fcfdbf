"""Canonicalization and code masking.

Masking keeps every character offset stable: fenced blocks are blanked with
spaces (newlines kept, so the block structure collapses to blank lines) and
inline code spans are overwritten with :data:`MASK_FILLER`, a non-whitespace
character that cannot start any Markdown construct.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from deepcite.models import Span

MASK_FILLER = "░"

_TRAILING_WHITESPACE = " \t\f\v"
_FENCE_OPEN = re.compile(r"^[ \t]*(?P<fence>`{3,}|~{3,})(?P<info>.*)$")
_FENCE_CLOSE = re.compile(r"^[ \t]*(?P<fence>`{3,}|~{3,})[ \t]*$")
_QUOTE_PREFIX = re.compile(r"(?:[ \t]{0,3}>[ \t]?)*")
_INLINE_CODE = re.compile(r"(?<!`)(?P<ticks>`+)(?!`)(?P<body>(?:(?!\n[ \t]*\n).)+?)(?<!`)(?P=ticks)(?!`)", re.DOTALL)


@dataclass(slots=True, frozen=True)
class MaskResult:
    """Masked text plus the regions that were blanked."""

    text: str
    spans: tuple[Span, ...]
    warnings: tuple[str, ...] = ()


def canonicalize(raw: str) -> str:
    """Normalize line endings to LF and strip trailing whitespace on every line.

    Tabs inside lines are kept as they are.  The function is idempotent.
    """

    text = raw.removeprefix("\ufeff").replace("\r\n", "\n").replace("\r", "\n")
    return "\n".join(line.rstrip(_TRAILING_WHITESPACE) for line in text.split("\n"))


def mask_code(canonical: str) -> MaskResult:
    """Blank out fenced code blocks and inline code spans.

    Fences inside blockquotes keep their ``>`` prefixes and end with the quote.
    An unterminated fence masks the rest of the document and records a warning.
    """

    chars = list(canonical)
    spans: list[Span] = []
    warnings: list[str] = []
    prose_regions: list[Span] = []

    lines = canonical.split("\n")
    offset = 0
    region_start = 0
    fence: str | None = None
    fence_start = 0
    fence_line = 0
    fence_depth = 0
    for index, line in enumerate(lines):
        line_end = offset + len(line)
        prefix = _quote_prefix_end(line, 0, len(line))
        depth = line[:prefix].count(">")
        if fence is not None and depth < fence_depth:
            _blank_fence(chars, canonical, fence_start, offset - 1, fence_depth)
            spans.append((fence_start, offset - 1))
            fence = None
            region_start = offset - 1
        body = line[prefix:] if depth else line
        if fence is None:
            match = _FENCE_OPEN.match(body)
            if match and not (match.group("fence")[0] == "`" and "`" in match.group("info")):
                fence = match.group("fence")
                fence_start = offset
                fence_line = index + 1
                fence_depth = depth
                prose_regions.append((region_start, offset))
        else:
            match = _FENCE_CLOSE.match(line[prefix:] if fence_depth else line)
            if match and match.group("fence")[0] == fence[0] and len(match.group("fence")) >= len(fence):
                _blank_fence(chars, canonical, fence_start, line_end, fence_depth)
                spans.append((fence_start, line_end))
                fence = None
                region_start = line_end
        offset = line_end + 1

    if fence is not None:
        end = len(canonical)
        _blank_fence(chars, canonical, fence_start, end, fence_depth)
        spans.append((fence_start, end))
        warnings.append(f"unterminated code fence opened on line {fence_line}; masked to end of document")
    else:
        prose_regions.append((region_start, len(canonical)))

    for start, end in prose_regions:
        for match in _INLINE_CODE.finditer(canonical, start, end):
            span_start, span_end = match.span()
            for position in range(span_start, span_end):
                if chars[position] != "\n":
                    chars[position] = MASK_FILLER
            spans.append((span_start, span_end))

    spans.sort()
    return MaskResult(text="".join(chars), spans=tuple(spans), warnings=tuple(warnings))


def _blank(chars: list[str], start: int, end: int) -> None:
    for position in range(start, end):
        if chars[position] != "\n":
            chars[position] = " "


def _quote_prefix_end(text: str, start: int, end: int) -> int:
    match = _QUOTE_PREFIX.match(text, start, end)
    return match.end() if match else start


def _blank_fence(chars: list[str], text: str, start: int, end: int, depth: int) -> None:
    if not depth:
        _blank(chars, start, end)
        return
    line_start = start
    while line_start < end:
        line_end = text.find("\n", line_start, end)
        if line_end == -1:
            line_end = end
        _blank(chars, _quote_prefix_end(text, line_start, line_end), line_end)
        line_start = line_end + 1


__all__ = ["MASK_FILLER", "MaskResult", "canonicalize", "mask_code"]
