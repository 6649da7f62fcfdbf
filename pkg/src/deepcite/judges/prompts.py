"""Rubric prompt templates shipped with the package."""

from __future__ import annotations

import re
from functools import cache
from importlib.resources import files

RELEVANCE_TEMPLATE = "relevance_v1"
FACT_CHECK_TEMPLATE = "factcheck_v1"
GRAMMAR_REMINDER = "grammar_reminder_v1"

_PLACEHOLDER = re.compile(r"\{(claim|content)\}")
_RUBRIC_HEADER = re.compile(r"^RUBRIC:\s*(?P<rubric>\S+)", re.MULTILINE)
_CLAIM_BLOCK = re.compile(r"<claim>\n(?P<text>.*?)\n</claim>", re.DOTALL)
_SOURCE_BLOCK = re.compile(r"<source>\n(?P<text>.*?)\n</source>", re.DOTALL)


@cache
def load_template(name: str) -> str:
    """Return the text of the packaged template ``name`` (without ``.txt``)."""

    return files("deepcite.judges").joinpath("prompts", f"{name}.txt").read_text(encoding="utf-8")


def _escape(text: str) -> str:
    return text.replace("</claim>", "<\\/claim>").replace("</source>", "<\\/source>")


def render_prompt(template: str, claim: str, content: str) -> str:
    """Fill ``{claim}`` and ``{content}`` in one pass so inputs are never re-expanded."""

    if not claim.strip():
        msg = "Cannot build a judge prompt for an empty claim"
        raise ValueError(msg)
    values = {"claim": _escape(claim), "content": _escape(content)}
    return _PLACEHOLDER.sub(lambda match: values[match.group(1)], load_template(template))


def build_relevance_prompt(claim: str, content: str) -> str:
    """Prompt asking whether ``content`` addresses the topic of ``claim``.

    ``content`` must already be truncated.
    """

    return render_prompt(RELEVANCE_TEMPLATE, claim, content)


def build_factcheck_prompt(claim: str, content: str) -> str:
    """Prompt asking whether the facts of ``claim`` are supported by ``content``."""

    return render_prompt(FACT_CHECK_TEMPLATE, claim, content)


def with_grammar_reminder(prompt: str) -> str:
    return f"{prompt.rstrip()}\n\n{load_template(GRAMMAR_REMINDER)}"


def prompt_rubric(prompt: str) -> str | None:
    """Rubric name declared on a rendered prompt's ``RUBRIC:`` line."""

    match = _RUBRIC_HEADER.search(prompt)
    return match.group("rubric") if match else None


def prompt_sections(prompt: str) -> tuple[str, str]:
    """Extract the claim and source sections of a rendered prompt."""

    claim = _CLAIM_BLOCK.search(prompt)
    source = _SOURCE_BLOCK.search(prompt)
    return (claim.group("text") if claim else "", source.group("text") if source else "")


__all__ = [
    "FACT_CHECK_TEMPLATE",
    "GRAMMAR_REMINDER",
    "RELEVANCE_TEMPLATE",
    "build_factcheck_prompt",
    "build_relevance_prompt",
    "load_template",
    "prompt_rubric",
    "prompt_sections",
    "render_prompt",
    "with_grammar_reminder",
]
