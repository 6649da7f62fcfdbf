"""Judge registry and helper functions."""

from __future__ import annotations

import os
from collections.abc import Callable
from pathlib import Path
from typing import Any, Mapping

from deepcite.judges.backends import HeuristicJudgeBackend, RemoteJudgeBackend, ScriptedJudgeBackend, prompt_digest
from deepcite.judges.base import JudgeBackend, JudgeRetryPolicy, JudgeVerdict, parse_judge_output, render_verdict
from deepcite.judges.evaluators import PairEvaluator, eval_fact_check, eval_link_works, eval_relevant_content
from deepcite.judges.prompts import build_factcheck_prompt, build_relevance_prompt, load_template

JudgeFactory = Callable[[Mapping[str, Any]], JudgeBackend]


_REGISTRY: dict[str, JudgeFactory] = {}


def register_judge(name: str, factory: JudgeFactory) -> None:
    """Register a judge backend factory under ``name``."""

    _REGISTRY[name] = factory


def get_judge(config: Mapping[str, Any] | None) -> JudgeBackend:
    """Instantiate a judge backend from ``config``; defaults to the heuristic stub."""

    if not config:
        return HeuristicJudgeBackend()

    backend = config.get("backend", "heuristic")
    factory = _REGISTRY.get(backend)
    if factory is None:
        msg = f"Unknown judge backend: {backend}"
        raise KeyError(msg)
    return factory(config)


def _create_heuristic_judge(config: Mapping[str, Any]) -> JudgeBackend:
    return HeuristicJudgeBackend(threshold=float(config.get("threshold", 0.5)))


def _create_scripted_judge(config: Mapping[str, Any]) -> JudgeBackend:
    script = config.get("script")
    if script:
        return ScriptedJudgeBackend.from_file(Path(script))
    return ScriptedJudgeBackend(config.get("responses"), default=config.get("default"))


def _create_remote_judge(config: Mapping[str, Any]) -> JudgeBackend:
    env = config.get("env") or os.environ
    api_key_env = config.get("api_key_env")
    return RemoteJudgeBackend(
        config.get("model"),
        provider=str(config.get("provider") or "openai"),
        endpoint=config.get("endpoint"),
        api_key=env.get(api_key_env) if api_key_env else None,
        debug=bool(config.get("debug", False)),
        chat_model=config.get("chat_model"),
    )


register_judge("heuristic", _create_heuristic_judge)
register_judge("scripted", _create_scripted_judge)
register_judge("remote", _create_remote_judge)

__all__ = [
    "HeuristicJudgeBackend",
    "JudgeBackend",
    "JudgeRetryPolicy",
    "JudgeVerdict",
    "PairEvaluator",
    "RemoteJudgeBackend",
    "ScriptedJudgeBackend",
    "build_factcheck_prompt",
    "build_relevance_prompt",
    "eval_fact_check",
    "eval_link_works",
    "eval_relevant_content",
    "get_judge",
    "load_template",
    "parse_judge_output",
    "prompt_digest",
    "register_judge",
    "render_verdict",
]
