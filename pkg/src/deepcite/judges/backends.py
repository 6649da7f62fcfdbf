"""Judge backends: a remote chat model and two deterministic stubs."""

from __future__ import annotations

import hashlib
import json
import logging
import re
from collections.abc import Mapping
from pathlib import Path
from typing import TYPE_CHECKING, Any

from deepcite.errors import ConfigurationError, JudgeError, JudgeUnavailableError
from deepcite.judges.base import JudgeVerdict, render_verdict
from deepcite.judges.prompts import prompt_rubric, prompt_sections

if TYPE_CHECKING:  # pragma: no cover - imported for type checkers only
    from langchain_core.language_models import BaseChatModel

LOGGER = logging.getLogger(__name__)

_TOKEN = re.compile(r"[a-z0-9]+(?:\.[0-9]+)?")
_NUMBER = re.compile(r"\d+(?:[.,]\d+)*")
_STOPWORDS = frozenset(
    {"a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has", "have", "in", "is", "it", "its",
     "of", "on", "or", "that", "the", "this", "to", "was", "were", "which", "with"}
)  # fmt: skip


def prompt_digest(prompt: str) -> str:
    """SHA-256 hex digest used to key scripted responses."""

    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class ScriptedJudgeBackend:
    """Answer prompts from a fixed ``prompt digest -> completion`` table.

    Args:
        responses: Completions keyed by :func:`prompt_digest` of the prompt.
        default: Completion returned for prompts missing from ``responses``.
            Without a default, unknown prompts raise :class:`JudgeError`.
    """

    def __init__(self, responses: Mapping[str, str] | None = None, *, default: str | None = None) -> None:
        self._responses = dict(responses or {})
        self._default = default
        self.calls: list[str] = []

    @classmethod
    def from_file(cls, path: Path) -> ScriptedJudgeBackend:
        """Load ``{"responses": {...}, "default": ...}`` from a JSON file."""

        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            msg = f"Cannot load judge script {path}: {exc}"
            raise ConfigurationError(msg) from exc
        if not isinstance(payload, Mapping):
            msg = f"Judge script {path} must contain a JSON object"
            raise ConfigurationError(msg)
        return cls(payload.get("responses") or {}, default=payload.get("default"))

    async def complete(self, prompt: str) -> str:
        self.calls.append(prompt)
        response = self._responses.get(prompt_digest(prompt), self._default)
        if response is None:
            msg = f"No scripted judge response for prompt {prompt_digest(prompt)[:12]}"
            raise JudgeError(msg)
        return response


def _tokens(text: str) -> set[str]:
    return {token for token in _TOKEN.findall(text.lower()) if token not in _STOPWORDS}


class HeuristicJudgeBackend:
    """Offline judge scoring by token overlap between claim and source.

    A claim whose tokens all occur in the source scores 1, a claim sharing none
    scores 0, and otherwise at least half of the claim tokens must occur.  For
    fact-check prompts every number in the claim must also appear in the source.
    """

    def __init__(self, *, threshold: float = 0.5) -> None:
        self.threshold = threshold

    async def complete(self, prompt: str) -> str:
        claim, source = prompt_sections(prompt)
        return render_verdict(self.judge(claim, source, fact_check=prompt_rubric(prompt) == "fact_check"))

    def judge(self, claim: str, source: str, *, fact_check: bool = False) -> JudgeVerdict:
        claim_tokens = _tokens(claim)
        source_tokens = _tokens(source)
        if not claim_tokens:
            return JudgeVerdict(0, "The claim has no content words to compare.")
        shared = claim_tokens & source_tokens
        overlap = len(shared) / len(claim_tokens)
        if fact_check:
            missing = sorted(set(_NUMBER.findall(claim)) - set(_NUMBER.findall(source)))
            if missing:
                return JudgeVerdict(0, f"Numbers absent from the source: {', '.join(missing)}.")
        if overlap >= self.threshold:
            return JudgeVerdict(1, f"{len(shared)} of {len(claim_tokens)} claim terms appear in the source.")
        return JudgeVerdict(0, f"Only {len(shared)} of {len(claim_tokens)} claim terms appear in the source.")


class RemoteJudgeBackend:
    """Chat-completion judge reached through a langchain chat model.

    Args:
        model: Model name, e.g. ``"gpt-4o-mini"``.
        provider: langchain provider name passed to ``init_chat_model``.
        endpoint: Optional base URL of a compatible chat-completion endpoint.
        api_key: Secret read from the environment by the caller.
        debug: Log request and response bodies at DEBUG level.
        chat_model: Pre-built chat model, mainly for tests.
    """

    def __init__(
        self,
        model: str | None = None,
        *,
        provider: str = "openai",
        endpoint: str | None = None,
        api_key: str | None = None,
        debug: bool = False,
        chat_model: BaseChatModel | None = None,
    ) -> None:
        self.model = model
        self.provider = provider
        self.endpoint = endpoint
        self.debug = debug
        self._api_key = api_key
        if chat_model is None:
            if not model:
                msg = "RemoteJudgeBackend requires a model name"
                raise ConfigurationError(msg)
            chat_model = _init_chat_model(model, provider=provider, endpoint=endpoint, api_key=api_key)
        self._chat_model = chat_model

    def __repr__(self) -> str:
        return f"RemoteJudgeBackend(model={self.model!r}, provider={self.provider!r}, endpoint={self.endpoint!r}, api_key=***)"

    async def complete(self, prompt: str) -> str:
        if self.debug:
            LOGGER.debug("Judge request to %s (%s): %s", self.endpoint or self.provider, self.model, self._redact(prompt))
        try:
            message = await self._chat_model.ainvoke(prompt)
        except Exception as exc:
            msg = f"Judge backend {self.model!r} failed: {self._redact(str(exc))}"
            raise JudgeUnavailableError(msg) from exc
        text = _message_text(message)
        if self.debug:
            LOGGER.debug("Judge response from %s: %s", self.model, self._redact(text))
        return text

    def _redact(self, text: str) -> str:
        if self._api_key:
            return text.replace(self._api_key, "***")
        return text


def _init_chat_model(model: str, *, provider: str, endpoint: str | None, api_key: str | None) -> BaseChatModel:
    from langchain.chat_models import init_chat_model

    kwargs: dict[str, Any] = {"temperature": 0}
    if endpoint:
        kwargs["base_url"] = endpoint
    if api_key:
        kwargs["api_key"] = api_key
    return init_chat_model(model, model_provider=provider, **kwargs)


def _message_text(message: Any) -> str:
    content = getattr(message, "content", message)
    if isinstance(content, str):
        return content
    if isinstance(content, list):
        parts = [part if isinstance(part, str) else str(part.get("text", "")) for part in content if isinstance(part, (str, dict))]
        return "".join(parts)
    return str(content)


__all__ = ["HeuristicJudgeBackend", "RemoteJudgeBackend", "ScriptedJudgeBackend", "prompt_digest"]
