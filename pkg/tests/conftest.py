"""Global pytest fixtures."""

from __future__ import annotations

import os

import pytest


@pytest.fixture(autouse=True)
def _isolated_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep developer ``DEEPCITE_*`` variables from leaking into settings tests."""

    for name in list(os.environ):
        if name.startswith("DEEPCITE_"):
            monkeypatch.delenv(name, raising=False)
