"""Configuration helpers for deepcite runs.

Settings come from four layers, highest precedence first: explicit overrides
(command-line flags), the JSON config file, ``DEEPCITE_<SECTION>_<KEY>``
environment variables and the defaults below.  Secrets are never read from
the config file; the judge API key is looked up in the environment variable
named by ``judge.api_key_env``.
"""

from __future__ import annotations

import json
import os
from collections.abc import Iterable, Mapping, MutableMapping
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from deepcite.errors import ConfigurationError
from deepcite.fetch import FetchPolicy
from deepcite.judges import JudgeRetryPolicy
from deepcite.models import ALL_DIMENSIONS, Dimension
from deepcite.runner import DEFAULT_BUDGETS, RunConfig

_ENV_PREFIX = "DEEPCITE_"
_SECTIONS = ("fetch", "judge", "runner", "output")
_FORBIDDEN_KEYS = frozenset({"api_key", "apikey", "secret", "password", "token"})
REPLAY_MODES = ("off", "record", "replay")

DIMENSION_ALIASES: dict[str, Dimension] = {
    "link": Dimension.LINK_WORKS,
    "links": Dimension.LINK_WORKS,
    "relevant": Dimension.RELEVANT_CONTENT,
    "relevance": Dimension.RELEVANT_CONTENT,
    "fact": Dimension.FACT_CHECK,
    "factcheck": Dimension.FACT_CHECK,
    **{dimension.value: dimension for dimension in ALL_DIMENSIONS},
}


def _coerce_mapping(value: Mapping[str, Any] | None, *, section: str) -> MutableMapping[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        msg = f"'{section}' configuration must be a mapping"
        raise ConfigurationError(msg)
    return dict(value)


def _coerce_bool(value: Any, *, default: bool) -> bool:
    """Coerce ``value`` into a boolean while supporting string representations."""

    if value is None:
        return default
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return bool(value)
    if isinstance(value, str):
        normalized = value.strip().lower()
        if normalized in {"1", "true", "yes", "on"}:
            return True
        if normalized in {"0", "false", "no", "off"}:
            return False
    msg = "Boolean configuration values must be boolean-like (true/false, 1/0, yes/no)"
    raise ConfigurationError(msg)


def _coerce_int(value: Any, *, name: str, default: int | None, minimum: int | None = 1) -> int | None:
    if value is None or value == "":
        return default
    if isinstance(value, bool):
        msg = f"{name} must be an integer"
        raise ConfigurationError(msg)
    try:
        number = int(value)
    except (TypeError, ValueError) as exc:
        msg = f"{name} must be an integer, got {value!r}"
        raise ConfigurationError(msg) from exc
    if minimum is not None and number < minimum:
        msg = f"{name} must be at least {minimum}, got {number}"
        raise ConfigurationError(msg)
    return number


def parse_dimensions(value: str | Iterable[str] | None) -> tuple[Dimension, ...]:
    """Parse ``link,relevant,fact`` style lists; full dimension names are accepted too.

    Raises:
        ConfigurationError: On an unknown or empty list.
    """

    if value is None:
        return ALL_DIMENSIONS
    items = value.split(",") if isinstance(value, str) else list(value)
    names = [str(item).strip().lower() for item in items if str(item).strip()]
    if not names:
        msg = "At least one evaluation dimension is required"
        raise ConfigurationError(msg)
    unknown = [name for name in names if name not in DIMENSION_ALIASES]
    if unknown:
        msg = f"Unknown evaluation dimension(s): {', '.join(unknown)}; expected link, relevant or fact"
        raise ConfigurationError(msg)
    return tuple(sorted({DIMENSION_ALIASES[name] for name in names}, key=lambda dimension: dimension.rank))


def parse_budgets(value: str | Iterable[Any] | None) -> tuple[int, ...]:
    """Parse a comma-separated list of positive tool-call budgets, sorted and deduplicated.

    Raises:
        ConfigurationError: On a malformed, empty or non-positive entry.
    """

    if value is None:
        return DEFAULT_BUDGETS
    items = value.split(",") if isinstance(value, str) else list(value)
    budgets = [_coerce_int(str(item).strip(), name="budget", default=None) for item in items if str(item).strip()]
    if not budgets:
        msg = f"Malformed budget list: {value!r}"
        raise ConfigurationError(msg)
    return tuple(sorted({budget for budget in budgets if budget is not None}))


def _reject_secrets(value: Any, *, path: str = "config") -> None:
    if isinstance(value, Mapping):
        for key, item in value.items():
            if str(key).lower() in _FORBIDDEN_KEYS:
                msg = f"{path}.{key} looks like a secret; set judge.api_key_env and export the key instead"
                raise ConfigurationError(msg)
            _reject_secrets(item, path=f"{path}.{key}")
    elif isinstance(value, list):
        for index, item in enumerate(value):
            _reject_secrets(item, path=f"{path}[{index}]")


def load_config_file(path: Path) -> dict[str, Any]:
    """Read a UTF-8 JSON config file.

    Raises:
        ConfigurationError: If the file is unreadable, not a JSON object or
            carries a secret.
    """

    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        msg = f"Cannot read config file {path}: {exc}"
        raise ConfigurationError(msg) from exc
    if not isinstance(payload, dict):
        msg = f"Config file {path} must contain a JSON object"
        raise ConfigurationError(msg)
    _reject_secrets(payload)
    unknown = sorted(set(payload) - set(_SECTIONS))
    if unknown:
        msg = f"Unknown config section(s) in {path}: {', '.join(unknown)}"
        raise ConfigurationError(msg)
    return payload


class _Layers:
    """Looks a key up through overrides, config file and environment, in that order."""

    def __init__(
        self,
        section: str,
        config: Mapping[str, Any] | None,
        overrides: Mapping[str, Any] | None,
        env: Mapping[str, str],
    ) -> None:
        root = _coerce_mapping(config, section="config")
        self._config = _coerce_mapping(root.get(section), section=section)
        self._overrides = _coerce_mapping(_coerce_mapping(overrides, section="overrides").get(section), section=section)
        self._env = env
        self._prefix = f"{_ENV_PREFIX}{section.upper()}_"

    def explicit(self, key: str) -> Any:
        value = self._overrides.get(key)
        return value if value is not None else self._config.get(key)

    def get(self, key: str) -> Any:
        for layer in (self._overrides, self._config):
            value = layer.get(key)
            if value is not None:
                return value
        return self._env.get(f"{self._prefix}{key.upper()}")


@dataclass(slots=True)
class JudgeSettings:
    """Which judge answers the rubric prompts and how hard to retry it."""

    backend: str = "heuristic"
    model: str | None = None
    provider: str = "openai"
    endpoint: str | None = None
    api_key_env: str | None = None
    debug: bool = False
    script: Path | None = None
    threshold: float = 0.5
    retry: JudgeRetryPolicy = field(default_factory=JudgeRetryPolicy)

    def validate(self) -> None:
        if self.backend == "remote" and not self.model:
            msg = "judge.model is required for the remote judge backend"
            raise ConfigurationError(msg)
        if self.backend == "scripted" and self.script is None:
            msg = "judge.script is required for the scripted judge backend"
            raise ConfigurationError(msg)
        if not 0.0 <= self.threshold <= 1.0:
            msg = "judge.threshold must lie between 0 and 1"
            raise ConfigurationError(msg)

    def selector(self, env: Mapping[str, str] | None = None) -> dict[str, Any]:
        """Mapping accepted by :func:`deepcite.judges.get_judge`."""

        selector: dict[str, Any] = {"backend": self.backend}
        if self.backend == "heuristic":
            selector["threshold"] = self.threshold
        elif self.backend == "scripted":
            selector["script"] = str(self.script)
        else:
            selector.update(
                {
                    "model": self.model,
                    "provider": self.provider,
                    "endpoint": self.endpoint,
                    "api_key_env": self.api_key_env,
                    "debug": self.debug,
                }
            )
            if env is not None:
                selector["env"] = env
        return selector


@dataclass(slots=True)
class RunnerSettings:
    """Concurrency, dimensions and report acquisition."""

    evaluator_concurrency: int = 15
    agent_concurrency: int = 10
    dimensions: tuple[Dimension, ...] = ALL_DIMENSIONS
    tool_call_budget: int | None = None
    agent_command: str | None = None
    agent_timeout_s: float | None = None
    reports_dir: Path | None = None
    budgets: tuple[int, ...] = DEFAULT_BUDGETS

    def validate(self) -> None:
        if self.evaluator_concurrency < 1 or self.agent_concurrency < 1:
            msg = "runner concurrency limits must be at least 1"
            raise ConfigurationError(msg)
        if self.agent_timeout_s is not None and self.agent_timeout_s <= 0:
            msg = "runner.agent_timeout_s must be positive"
            raise ConfigurationError(msg)


@dataclass(slots=True)
class OutputSettings:
    """Where runs, documents and the replay cache live."""

    workdir: Path | None = None
    runs_dir: Path = Path("runs")
    replay_dir: Path | None = None
    replay_mode: str = "off"

    def validate(self) -> None:
        if self.replay_mode not in REPLAY_MODES:
            msg = f"output.replay_mode must be one of {', '.join(REPLAY_MODES)}"
            raise ConfigurationError(msg)
        if self.replay_mode != "off" and self.replay_dir is None:
            msg = f"output.replay_dir is required when replay_mode is '{self.replay_mode}'"
            raise ConfigurationError(msg)

    def resolve(self, path: Path | str) -> Path:
        """Resolve ``path`` against ``workdir`` when it is relative."""

        resolved = Path(path)
        if self.workdir is not None and not resolved.is_absolute():
            return self.workdir / resolved
        return resolved

    def fetcher_selector(self) -> dict[str, Any]:
        """Mapping accepted by :func:`deepcite.fetch.get_fetcher`."""

        if self.replay_mode == "off" or self.replay_dir is None:
            return {"backend": "http"}
        backend = "record" if self.replay_mode == "record" else "replay"
        return {"backend": backend, "replay_dir": self.resolve(self.replay_dir)}


@dataclass(slots=True)
class DeepciteSettings:
    """Aggregate configuration for a deepcite invocation."""

    fetch: FetchPolicy = field(default_factory=FetchPolicy)
    judge: JudgeSettings = field(default_factory=JudgeSettings)
    runner: RunnerSettings = field(default_factory=RunnerSettings)
    output: OutputSettings = field(default_factory=OutputSettings)
    env: Mapping[str, str] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.judge.validate()
        self.runner.validate()
        self.output.validate()

    def run_config(self, run_id: str = "run", *, dimensions: Iterable[Dimension] | None = None) -> RunConfig:
        """Build the :class:`RunConfig` for one run."""

        judge = self.judge.selector(self.env)
        if "script" in judge:
            judge["script"] = str(self.output.resolve(judge["script"]))
        return RunConfig(
            evaluator_concurrency=self.runner.evaluator_concurrency,
            agent_concurrency=self.runner.agent_concurrency,
            fetch_policy=self.fetch,
            dimensions=tuple(dimensions) if dimensions is not None else self.runner.dimensions,
            judge=judge,
            fetcher=self.output.fetcher_selector(),
            judge_retry=self.judge.retry,
            tool_call_budget=self.runner.tool_call_budget,
            run_id=run_id,
        )


def load_fetch_settings(
    config: Mapping[str, Any] | None = None,
    *,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> FetchPolicy:
    """Materialize the :class:`FetchPolicy` from the ``fetch`` section."""

    layers = _Layers("fetch", config, overrides, dict(os.environ if env is None else env))
    defaults = FetchPolicy()
    values: dict[str, Any] = {}
    for item in fields(FetchPolicy):
        raw = layers.get(item.name)
        if item.name == "user_agent":
            values[item.name] = str(raw) if raw else defaults.user_agent
        elif item.name == "fact_check_truncation_limit":
            values[item.name] = _coerce_int(raw, name=f"fetch.{item.name}", default=None)
        else:
            values[item.name] = _coerce_int(raw, name=f"fetch.{item.name}", default=getattr(defaults, item.name))
    try:
        return FetchPolicy(**values)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def load_judge_settings(
    config: Mapping[str, Any] | None = None,
    *,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> JudgeSettings:
    """Materialize :class:`JudgeSettings` from the ``judge`` section.

    Raises:
        ConfigurationError: If the section carries an inline API key or is inconsistent.
    """

    layers = _Layers("judge", config, overrides, dict(os.environ if env is None else env))
    for key in ("api_key", "key"):
        if layers.explicit(key) is not None:
            msg = "judge API keys are read from the environment variable named by judge.api_key_env, never from config"
            raise ConfigurationError(msg)
    script = layers.get("script")
    threshold = layers.get("threshold")
    try:
        threshold_value = 0.5 if threshold is None else float(threshold)
    except (TypeError, ValueError) as exc:
        msg = f"judge.threshold must be a number, got {threshold!r}"
        raise ConfigurationError(msg) from exc
    try:
        retry = JudgeRetryPolicy(
            max_retries=_coerce_int(layers.get("max_retries"), name="judge.max_retries", default=5, minimum=0) or 0,
            retry_delay_ms=_coerce_int(layers.get("retry_delay_ms"), name="judge.retry_delay_ms", default=5000) or 5000,
            parse_retries=_coerce_int(layers.get("parse_retries"), name="judge.parse_retries", default=3, minimum=0) or 0,
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    settings = JudgeSettings(
        backend=str(layers.get("backend") or "heuristic"),
        model=layers.get("model"),
        provider=str(layers.get("provider") or "openai"),
        endpoint=layers.get("endpoint"),
        api_key_env=layers.get("api_key_env"),
        debug=_coerce_bool(layers.get("debug"), default=False),
        script=Path(script) if script else None,
        threshold=threshold_value,
        retry=retry,
    )
    settings.validate()
    return settings


def load_runner_settings(
    config: Mapping[str, Any] | None = None,
    *,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunnerSettings:
    """Materialize :class:`RunnerSettings` from the ``runner`` section."""

    layers = _Layers("runner", config, overrides, dict(os.environ if env is None else env))
    timeout = layers.get("agent_timeout_s")
    reports_dir = layers.get("reports_dir")
    try:
        timeout_value = None if timeout in (None, "") else float(timeout)
    except (TypeError, ValueError) as exc:
        msg = f"runner.agent_timeout_s must be a number, got {timeout!r}"
        raise ConfigurationError(msg) from exc
    settings = RunnerSettings(
        evaluator_concurrency=_coerce_int(layers.get("evaluator_concurrency"), name="runner.evaluator_concurrency", default=15) or 15,
        agent_concurrency=_coerce_int(layers.get("agent_concurrency"), name="runner.agent_concurrency", default=10) or 10,
        dimensions=parse_dimensions(layers.get("dimensions")),
        tool_call_budget=_coerce_int(layers.get("tool_call_budget"), name="runner.tool_call_budget", default=None),
        agent_command=layers.get("agent_command"),
        agent_timeout_s=timeout_value,
        reports_dir=Path(reports_dir) if reports_dir else None,
        budgets=parse_budgets(layers.get("budgets")),
    )
    settings.validate()
    return settings


def load_output_settings(
    config: Mapping[str, Any] | None = None,
    *,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> OutputSettings:
    """Materialize :class:`OutputSettings` from the ``output`` section."""

    layers = _Layers("output", config, overrides, dict(os.environ if env is None else env))
    workdir = layers.get("workdir")
    replay_dir = layers.get("replay_dir")
    replay_mode = layers.get("replay_mode")
    if replay_mode is None:
        replay_mode = "replay" if replay_dir else "off"
    settings = OutputSettings(
        workdir=Path(workdir) if workdir else None,
        runs_dir=Path(layers.get("runs_dir") or "runs"),
        replay_dir=Path(replay_dir) if replay_dir else None,
        replay_mode=str(replay_mode),
    )
    settings.validate()
    return settings


def load_settings(
    config: Mapping[str, Any] | None = None,
    *,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> DeepciteSettings:
    """Materialize every section.

    Args:
        config: Parsed config file, keyed by section.
        env: Environment mapping used for fallbacks and the judge API key.
            Defaults to ``os.environ``.
        overrides: Section-keyed values that beat both the file and the
            environment, typically command-line flags.
    """

    _reject_secrets(config or {})
    environment = dict(os.environ if env is None else env)
    return DeepciteSettings(
        fetch=load_fetch_settings(config, env=environment, overrides=overrides),
        judge=load_judge_settings(config, env=environment, overrides=overrides),
        runner=load_runner_settings(config, env=environment, overrides=overrides),
        output=load_output_settings(config, env=environment, overrides=overrides),
        env=environment,
    )


__all__ = [
    "DIMENSION_ALIASES",
    "REPLAY_MODES",
    "DeepciteSettings",
    "JudgeSettings",
    "OutputSettings",
    "RunnerSettings",
    "load_config_file",
    "load_fetch_settings",
    "load_judge_settings",
    "load_output_settings",
    "load_runner_settings",
    "load_settings",
    "parse_budgets",
    "parse_dimensions",
]
