"""Block and inline syntax tree over masked canonical text.

Block structure comes from markdown-it-py's CommonMark parser.  markdown-it only
reports line maps, so every block keeps its content text together with a map
from content index to canonical offset; inline citation syntax is then lexed
from the content and carries canonical spans.
"""

from __future__ import annotations

import re
from bisect import bisect_left
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import StrEnum

from markdown_it import MarkdownIt
from markdown_it.tree import SyntaxTreeNode

from deepcite.models import Span

REFERENCE_HEADINGS = frozenset({"references", "sources", "citations", "bibliography"})

_INLINE_TOKENS = re.compile(
    r"""
    (?P<link>(?<![!\\])\[(?P<link_text>[^\[\]\n]*(?:\[[^\[\]\n]*\][^\[\]\n]*)*)\]
        \((?P<link_dest><[^<>\n]*>|[^\s()]+)(?:\s+(?:"[^"\n]*"|'[^'\n]*'))?\s*\))
    |(?P<autolink><(?P<autolink_url>https?://[^<>\s]+)>)
    |(?P<footnote>(?<!\\)\[\^(?P<footnote_label>[^\]\s]+)\](?![:(]))
    |(?P<numbered>(?<!\\)\[(?P<numbered_body>\d+(?:\s*[-–,]\s*\d+)*)\](?![(:]))
    """,
    re.VERBOSE,
)
_BARE_URL = re.compile(r"https?://[^\s<>()\[\]\"']+")
_BARE_URL_TRAILING = ".,;:!?"
_DEFINITION_URL = re.compile(r"^\s*\[[^\]]*\]:\s*(?P<body>(?:<(?P<angle>[^<>\n]*)>|(?P<plain>\S+)))")
_FOOTNOTE_PARAGRAPH = re.compile(r"^\[\^(?P<label>[^\]\s]+)\]:\s*")


class BlockKind(StrEnum):
    PARAGRAPH = "paragraph"
    HEADING = "heading"
    LIST_ITEM = "list_item"
    REFERENCE_DEFINITION = "reference_definition"
    FOOTNOTE_DEFINITION = "footnote_definition"


class InlineKind(StrEnum):
    TEXT = "text"
    LINK = "link"
    AUTOLINK = "autolink"
    FOOTNOTE_REF = "footnote_ref"
    NUMBERED_REF = "numbered_ref"


@dataclass(slots=True, frozen=True)
class InlineNode:
    """One inline token.

    ``label`` is the link text, the footnote label without ``^``, or the raw
    bracket body of a numbered reference (``"1-3"``).
    """

    kind: InlineKind
    span: Span
    text: str
    label: str = ""
    url: str | None = None
    content_span: Span = (0, 0)


@dataclass(slots=True)
class BlockNode:
    """A block-level element and its source spans."""

    id: int
    kind: BlockKind
    span: Span
    text: str = ""
    offsets: tuple[int, ...] = ()
    inlines: tuple[InlineNode, ...] = ()
    children: list[BlockNode] = field(default_factory=list)
    level: int = 0
    label: str = ""
    url: str | None = None
    ordered: bool = False
    section: str | None = None
    in_references: bool = False
    passage_id: int | None = None

    @property
    def is_passage_text(self) -> bool:
        """Whether this block holds claim text eligible for attribution."""

        return self.kind is BlockKind.PARAGRAPH and self.passage_id is not None

    def content_span(self, span: Span) -> Span:
        """Map a canonical span inside this block back to content indices."""

        return (bisect_left(self.offsets, span[0]), bisect_left(self.offsets, span[1]))

    def canonical_span(self, start: int, end: int) -> Span:
        return (self.offsets[start], self.offsets[end - 1] + 1)

    def urls(self) -> list[str]:
        """URLs carried by links and autolinks, or bare URLs when there are none."""

        if self.kind is BlockKind.LIST_ITEM:
            blocks = [child for child in self.children if child.kind is BlockKind.PARAGRAPH]
        else:
            blocks = [self]
        linked = [node.url for block in blocks for node in block.inlines if node.kind in (InlineKind.LINK, InlineKind.AUTOLINK) and node.url]
        if linked:
            return linked
        return [url for block in blocks for url in find_bare_urls(block.text)]


@dataclass(slots=True)
class MarkdownTree:
    """Top-level blocks of a document, with list items holding their own blocks."""

    blocks: list[BlockNode] = field(default_factory=list)
    length: int = 0

    def walk(self) -> Iterator[BlockNode]:
        """Yield every block in document order, containers before their children."""

        stack = list(reversed(self.blocks))
        while stack:
            block = stack.pop()
            yield block
            stack.extend(reversed(block.children))

    def passage_blocks(self) -> list[BlockNode]:
        return [block for block in self.walk() if block.is_passage_text]

    def of_kind(self, kind: BlockKind) -> list[BlockNode]:
        return [block for block in self.walk() if block.kind is kind]


def find_bare_urls(text: str) -> list[str]:
    """Return ``http(s)`` URLs written without link syntax."""

    return [match.group(0).rstrip(_BARE_URL_TRAILING) for match in _BARE_URL.finditer(text)]


def lex_inlines(text: str) -> list[tuple[InlineKind, int, int, str, str | None]]:
    """Split ``text`` into inline tokens as ``(kind, start, end, label, url)`` tuples."""

    tokens: list[tuple[InlineKind, int, int, str, str | None]] = []
    position = 0
    for match in _INLINE_TOKENS.finditer(text):
        if match.start() > position:
            tokens.append((InlineKind.TEXT, position, match.start(), "", None))
        if match.group("link") is not None:
            destination = match.group("link_dest").removeprefix("<").removesuffix(">")
            tokens.append((InlineKind.LINK, match.start(), match.end(), match.group("link_text"), destination))
        elif match.group("autolink") is not None:
            url = match.group("autolink_url")
            tokens.append((InlineKind.AUTOLINK, match.start(), match.end(), url, url))
        elif match.group("footnote") is not None:
            tokens.append((InlineKind.FOOTNOTE_REF, match.start(), match.end(), match.group("footnote_label"), None))
        else:
            tokens.append((InlineKind.NUMBERED_REF, match.start(), match.end(), match.group("numbered_body"), None))
        position = match.end()
    if position < len(text):
        tokens.append((InlineKind.TEXT, position, len(text), "", None))
    return tokens


def citation_token_spans(text: str) -> list[Span]:
    """Spans of citation syntax (links, autolinks, footnote and numbered refs) in ``text``."""

    return [(start, end) for kind, start, end, _, _ in lex_inlines(text) if kind is not InlineKind.TEXT]


def _definition_target(source: str) -> str | None:
    """Destination of a definition; a body written as a link cites the link target."""

    match = _DEFINITION_URL.match(source)
    if match is None:
        return None
    for kind, _, _, _, url in lex_inlines(source[match.start("body") :]):
        if kind in (InlineKind.LINK, InlineKind.AUTOLINK) and url:
            return url
    return match.group("angle") if match.group("angle") is not None else match.group("plain")


def build_ast(masked: str) -> MarkdownTree:
    """Parse masked canonical text into a :class:`MarkdownTree`.

    Markdown has no fatal parse errors; malformed constructs end up as text.
    """

    parser = MarkdownIt("commonmark", {"inline_definitions": True})
    root = SyntaxTreeNode(parser.parse(masked))
    builder = _TreeBuilder(masked)
    builder.visit(root, container=None)
    return MarkdownTree(blocks=builder.blocks, length=len(masked))


class _TreeBuilder:
    def __init__(self, text: str) -> None:
        self.text = text
        self.lines = text.split("\n")
        self.line_starts: list[int] = []
        offset = 0
        for line in self.lines:
            self.line_starts.append(offset)
            offset += len(line) + 1
        self.blocks: list[BlockNode] = []
        self.next_id = 1
        self.section: str | None = None
        self.references_level: int | None = None

    def _new_id(self) -> int:
        block_id = self.next_id
        self.next_id += 1
        return block_id

    def _line_span(self, line_map: list[int] | None) -> Span:
        if not line_map:
            return (0, 0)
        first, last = line_map[0], max(line_map[1] - 1, line_map[0])
        return (self.line_starts[first], self.line_starts[last] + len(self.lines[last]))

    def _append(self, block: BlockNode, container: BlockNode | None) -> None:
        if container is None:
            self.blocks.append(block)
        else:
            container.children.append(block)

    def visit(self, node: SyntaxTreeNode, *, container: BlockNode | None) -> None:
        for child in node.children:
            kind = child.type
            if kind == "heading":
                self._heading(child, container)
            elif kind == "paragraph":
                self._paragraph(child, container)
            elif kind == "list_item":
                self._list_item(child, node, container)
            elif kind == "definition":
                self._definition(child, container)
            elif kind in {"bullet_list", "ordered_list", "blockquote"}:
                self.visit(child, container=container)

    def _heading(self, node: SyntaxTreeNode, container: BlockNode | None) -> None:
        level = int(node.tag[1:]) if node.tag.startswith("h") else 1
        inline = node.children[0] if node.children else None
        content = inline.content if inline is not None else ""
        offsets = self._align(content, node.map)
        title = content.strip()
        if self.references_level is not None and level <= self.references_level:
            self.references_level = None
        if title.rstrip(":").strip().lower() in REFERENCE_HEADINGS and self.references_level is None:
            self.references_level = level
        self.section = title
        block = BlockNode(
            id=self._new_id(),
            kind=BlockKind.HEADING,
            span=self._line_span(node.map),
            text=content,
            offsets=offsets,
            inlines=self._inlines(content, offsets),
            level=level,
            section=title,
            in_references=self.references_level is not None,
        )
        self._append(block, container)

    def _paragraph(self, node: SyntaxTreeNode, container: BlockNode | None) -> None:
        inline = node.children[0] if node.children else None
        content = inline.content if inline is not None else ""
        offsets = self._align(content, node.map)
        inlines = self._inlines(content, offsets)
        in_references = self.references_level is not None
        footnote = _FOOTNOTE_PARAGRAPH.match(content)
        if footnote is not None:
            body = content[footnote.end() :]
            linked = [item.url for item in inlines if item.kind in (InlineKind.LINK, InlineKind.AUTOLINK) and item.url]
            urls = linked or find_bare_urls(body)
            block = BlockNode(
                id=self._new_id(),
                kind=BlockKind.FOOTNOTE_DEFINITION,
                span=self._line_span(node.map),
                text=content,
                offsets=offsets,
                inlines=inlines,
                label=footnote.group("label"),
                url=urls[0] if urls else None,
                section=self.section,
                in_references=in_references,
            )
            self._append(block, container)
            return
        block = BlockNode(
            id=self._new_id(),
            kind=BlockKind.PARAGRAPH,
            span=self._line_span(node.map),
            text=content,
            offsets=offsets,
            inlines=inlines,
            section=self.section,
            in_references=in_references,
        )
        if not in_references:
            block.passage_id = container.id if container is not None and container.kind is BlockKind.LIST_ITEM else block.id
        self._append(block, container)

    def _list_item(self, node: SyntaxTreeNode, parent: SyntaxTreeNode, container: BlockNode | None) -> None:
        ordered = parent.type == "ordered_list"
        block = BlockNode(
            id=self._new_id(),
            kind=BlockKind.LIST_ITEM,
            span=self._line_span(node.map),
            label=node.info if ordered else "",
            ordered=ordered,
            section=self.section,
            in_references=self.references_level is not None,
        )
        self._append(block, container)
        self.visit(node, container=block)
        paragraphs = [child for child in block.children if child.kind is BlockKind.PARAGRAPH]
        if paragraphs:
            block.text = paragraphs[0].text
            block.offsets = paragraphs[0].offsets

    def _definition(self, node: SyntaxTreeNode, container: BlockNode | None) -> None:
        meta = node.meta or {}
        raw_label = str(meta.get("label", ""))
        span = self._line_span(node.map)
        url = _definition_target(self.text[span[0] : span[1]]) or meta.get("url") or None
        footnote = raw_label.startswith("^")
        block = BlockNode(
            id=self._new_id(),
            kind=BlockKind.FOOTNOTE_DEFINITION if footnote else BlockKind.REFERENCE_DEFINITION,
            span=span,
            text=self.text[span[0] : span[1]],
            offsets=tuple(range(span[0], span[1])),
            label=raw_label[1:] if footnote else raw_label,
            url=url,
            section=self.section,
            in_references=self.references_level is not None,
        )
        self._append(block, container)

    def _align(self, content: str, line_map: list[int] | None) -> tuple[int, ...]:
        """Map each content character to its canonical offset.

        Content lines are suffixes of their source lines once block prefixes are
        removed; newlines map to the source line ends.
        """

        if not line_map or not content:
            return ()
        offsets: list[int] = []
        content_lines = content.split("\n")
        for index, content_line in enumerate(content_lines):
            line_no = min(line_map[0] + index, len(self.lines) - 1)
            source_line = self.lines[line_no]
            line_start = self.line_starts[line_no]
            stripped = content_line.lstrip()
            if source_line.endswith(content_line):
                column = len(source_line) - len(content_line)
                offsets.extend(range(line_start + column, line_start + len(source_line)))
            elif stripped and source_line.endswith(stripped):
                column = len(source_line) - len(stripped)
                offsets.extend([line_start + column] * (len(content_line) - len(stripped)))
                offsets.extend(range(line_start + column, line_start + len(source_line)))
            else:
                column = max(source_line.find(stripped), 0) if stripped else 0
                offsets.extend(min(line_start + column + position, line_start + len(source_line)) for position in range(len(content_line)))
            if index < len(content_lines) - 1:
                offsets.append(line_start + len(source_line))
        return tuple(offsets)

    @staticmethod
    def _inlines(content: str, offsets: tuple[int, ...]) -> tuple[InlineNode, ...]:
        if not content or len(offsets) != len(content):
            return ()
        return tuple(
            InlineNode(
                kind=kind,
                span=(offsets[start], offsets[end - 1] + 1),
                text=content[start:end],
                label=label,
                url=url,
                content_span=(start, end),
            )
            for kind, start, end, label, url in lex_inlines(content)
        )


__all__ = [
    "REFERENCE_HEADINGS",
    "BlockKind",
    "BlockNode",
    "InlineKind",
    "InlineNode",
    "MarkdownTree",
    "build_ast",
    "citation_token_spans",
    "find_bare_urls",
    "lex_inlines",
]
