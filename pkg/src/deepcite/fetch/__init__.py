"""Fetcher registry and helper functions."""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path
from typing import Any, Mapping

from deepcite.fetch.base import (
    DEFAULT_USER_AGENT,
    ContentFlag,
    FetchCategory,
    Fetcher,
    FetchOutcome,
    FetchPolicy,
    TransportFailure,
    classify,
    is_transient,
    truncate,
)
from deepcite.fetch.extract import ExtractedText, extract_text
from deepcite.fetch.http import HttpFetcher, fetch
from deepcite.fetch.replay import RecordingTransport, ReplayTransport, recording_path

FetcherFactory = Callable[[Mapping[str, Any]], Fetcher]


_REGISTRY: dict[str, FetcherFactory] = {}


def register_fetcher(name: str, factory: FetcherFactory) -> None:
    """Register a fetcher factory under ``name``."""

    _REGISTRY[name] = factory


def get_fetcher(config: Mapping[str, Any] | None) -> Fetcher:
    """Instantiate a fetcher from ``config`` using the registered factories.

    ``config`` may carry ``backend`` (default ``"http"``), ``policy`` and, for the
    cache backends, ``replay_dir``.
    """

    config = config or {}
    backend = config.get("backend", "http")
    factory = _REGISTRY.get(backend)
    if factory is None:
        msg = f"Unknown fetcher backend: {backend}"
        raise KeyError(msg)
    return factory(config)


def _policy(config: Mapping[str, Any]) -> FetchPolicy:
    policy = config.get("policy")
    return policy if isinstance(policy, FetchPolicy) else FetchPolicy()


def _replay_dir(config: Mapping[str, Any]) -> Path:
    directory = config.get("replay_dir")
    if not directory:
        msg = f"The '{config.get('backend')}' fetcher requires a 'replay_dir' entry in the config"
        raise ValueError(msg)
    return Path(directory)


async def _no_delay(_: float) -> None:
    return None


def _frozen_clock() -> float:
    return 0.0


def _create_http_fetcher(config: Mapping[str, Any]) -> Fetcher:
    return HttpFetcher(_policy(config), transport=config.get("transport"))


def _create_record_fetcher(config: Mapping[str, Any]) -> Fetcher:
    return HttpFetcher(_policy(config), transport=RecordingTransport(_replay_dir(config), inner=config.get("transport")))


def _create_replay_fetcher(config: Mapping[str, Any]) -> Fetcher:
    # Replayed runs must serialize byte-identically, so time is frozen.
    return HttpFetcher(_policy(config), transport=ReplayTransport(_replay_dir(config)), sleep=_no_delay, clock=_frozen_clock)


register_fetcher("http", _create_http_fetcher)
register_fetcher("record", _create_record_fetcher)
register_fetcher("replay", _create_replay_fetcher)

__all__ = [
    "DEFAULT_USER_AGENT",
    "ContentFlag",
    "ExtractedText",
    "FetchCategory",
    "FetchOutcome",
    "FetchPolicy",
    "Fetcher",
    "HttpFetcher",
    "RecordingTransport",
    "ReplayTransport",
    "TransportFailure",
    "classify",
    "extract_text",
    "fetch",
    "get_fetcher",
    "is_transient",
    "recording_path",
    "register_fetcher",
    "truncate",
]
