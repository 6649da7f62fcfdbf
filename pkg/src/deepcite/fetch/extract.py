"""Judge-ready text extraction from fetched response bodies."""

from __future__ import annotations

import codecs
from dataclasses import dataclass

from bs4 import BeautifulSoup
from bs4.dammit import EncodingDetector

from deepcite.fetch.base import ContentFlag

HIDDEN_TAGS = ("script", "style", "nav", "noscript", "template", "iframe", "svg", "head")

_HTML_TYPES = frozenset({"text/html", "application/xhtml+xml"})
_TEXT_TYPES = frozenset({"application/json", "application/xml", "application/markdown", "application/x-markdown"})


@dataclass(slots=True, frozen=True)
class ExtractedText:
    text: str
    flags: frozenset[ContentFlag] = frozenset()


def parse_content_type(content_type: str | None) -> tuple[str, str | None]:
    """Split a ``Content-Type`` header into its media type and charset."""

    if not content_type:
        return "", None
    media_type, *params = (part.strip() for part in content_type.split(";"))
    charset = None
    for param in params:
        key, _, value = param.partition("=")
        if key.strip().lower() == "charset" and value:
            charset = value.strip().strip("\"'")
    return media_type.lower(), charset


def extract_text(body: bytes, content_type: str | None) -> ExtractedText:
    """Turn a response body into plain text.

    HTML loses script, style and navigation content and has its whitespace
    collapsed; without a header charset its ``<meta charset>`` is used.
    Text-like types pass through.  PDF and other binary types yield
    empty text flagged ``unsupported_content``.  Bytes that do not decode are
    replaced and flagged ``lossy_decode``.
    """

    media_type, charset = parse_content_type(content_type)
    if not body:
        return ExtractedText("", frozenset({ContentFlag.EMPTY_CONTENT}))
    is_html = media_type in _HTML_TYPES or (not media_type and body.lstrip()[:1] == b"<")
    is_text = media_type.startswith("text/") or media_type in _TEXT_TYPES or media_type.endswith("+json")
    if not is_html and not is_text and media_type:
        return ExtractedText("", frozenset({ContentFlag.UNSUPPORTED_CONTENT}))

    if is_html and not charset:
        charset = EncodingDetector.find_declared_encoding(body, is_html=True)
    decoded, lossy = _decode(body, charset)
    flags: set[ContentFlag] = {ContentFlag.LOSSY_DECODE} if lossy else set()
    text = html_to_text(decoded) if is_html else decoded
    if not text.strip():
        flags.add(ContentFlag.EMPTY_CONTENT)
    return ExtractedText(text, frozenset(flags))


def html_to_text(markup: str) -> str:
    """Visible text of an HTML document with whitespace collapsed."""

    soup = BeautifulSoup(markup, "html.parser")
    for tag in soup.find_all(HIDDEN_TAGS):
        tag.decompose()
    return " ".join(soup.get_text(" ").split())


def _decode(body: bytes, charset: str | None) -> tuple[str, bool]:
    encoding = "utf-8"
    if charset:
        try:
            encoding = codecs.lookup(charset).name
        except LookupError:
            encoding = "utf-8"
    try:
        return body.decode(encoding), False
    except UnicodeDecodeError:
        return body.decode(encoding, errors="replace"), True


__all__ = ["HIDDEN_TAGS", "ExtractedText", "extract_text", "html_to_text", "parse_content_type"]
