"""Rule-based sentence segmentation over passage text.

A boundary is a run of terminal punctuation (``.``, ``!``, ``?``) plus closing
quotes or brackets, followed by whitespace and an uppercase letter, digit,
bracket or quote.  Citation markers right after the punctuation stay with the
sentence they close.  Periods after the abbreviations in :data:`ABBREVIATIONS`,
single-letter initials and decimal points never end a sentence.
"""

from __future__ import annotations

import re

from deepcite.models import Span
from deepcite.parser.tree import citation_token_spans

ABBREVIATIONS = frozenset(
    {
        "dr.",
        "mr.",
        "mrs.",
        "ms.",
        "prof.",
        "sr.",
        "jr.",
        "st.",
        "e.g.",
        "i.e.",
        "vs.",
        "cf.",
        "fig.",
        "figs.",
        "eq.",
        "al.",
        "no.",
        "vol.",
        "pp.",
        "p.",
        "ch.",
        "sec.",
        "approx.",
        "inc.",
        "ltd.",
        "co.",
        "corp.",
        "u.s.",
        "u.k.",
        "jan.",
        "feb.",
        "mar.",
        "apr.",
        "jun.",
        "jul.",
        "aug.",
        "sep.",
        "sept.",
        "oct.",
        "nov.",
        "dec.",
    }
)

_TERMINALS = ".!?"
_CLOSERS = "\"')]’”»"
_OPENERS = "[(\"'‘“«*_"
_INITIALISM = re.compile(r"^(?:[A-Za-z]\.){2,}$")
_INITIAL = re.compile(r"^[A-Z]\.$")
_WORD_PREFIX = "([\"'“‘"


def segment_sentences(text: str) -> list[Span]:
    """Split passage ``text`` into sentence spans.

    Spans are non-overlapping, trimmed of surrounding whitespace and together
    cover all non-whitespace text.  Citation syntax is skipped while looking for
    boundaries, so periods inside link targets do not split sentences.
    """

    tokens = citation_token_spans(text)
    token_end = dict(tokens)
    length = len(text)
    spans: list[Span] = []
    start = 0
    index = 0
    token_index = 0
    while index < length:
        while token_index < len(tokens) and tokens[token_index][1] <= index:
            token_index += 1
        if token_index < len(tokens) and tokens[token_index][0] <= index:
            index = tokens[token_index][1]
            continue
        if text[index] not in _TERMINALS or not _may_end_sentence(text, index):
            index += 1
            continue
        end = index + 1
        while end < length and text[end] in _TERMINALS:
            end += 1
        while end < length and text[end] in _CLOSERS:
            end += 1
        cursor = end
        while True:
            ahead = cursor
            while ahead < length and text[ahead] in " \t\n":
                ahead += 1
            if ahead in token_end:
                cursor = end = token_end[ahead]
                while end < length and text[end] in _TERMINALS + _CLOSERS:
                    cursor = end = end + 1
                continue
            break
        following = end
        while following < length and text[following].isspace():
            following += 1
        if following >= length or (following > end and _starts_sentence(text[following])):
            spans.append((start, end))
            start = following
            index = following
            continue
        index = end
    if start < length:
        spans.append((start, length))
    return [trimmed for span in spans if (trimmed := _trim(text, span)) is not None]


def _may_end_sentence(text: str, index: int) -> bool:
    if text[index] != ".":
        return True
    if 0 < index < len(text) - 1 and text[index - 1].isdigit() and text[index + 1].isdigit():
        return False
    word_start = index
    while word_start > 0 and not text[word_start - 1].isspace():
        word_start -= 1
    word = text[word_start : index + 1].lstrip(_WORD_PREFIX)
    if word.lower() in ABBREVIATIONS:
        return False
    return not (_INITIAL.match(word) or _INITIALISM.match(word))


def _starts_sentence(char: str) -> bool:
    return char.isupper() or char.isdigit() or char in _OPENERS


def _trim(text: str, span: Span) -> Span | None:
    start, end = span
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if start == end:
        return None
    return (start, end)


__all__ = ["ABBREVIATIONS", "segment_sentences"]
