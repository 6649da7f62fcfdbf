"""Record and replay of HTTP exchanges for hermetic evaluation runs.

Each URL maps to ``<directory>/<sha256(url)>.json`` holding either the
response (status, headers, base64 body) or the transport error that occurred.
Replaying a recording yields the same fetch outcomes without network access.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
from pathlib import Path
from typing import Any

import httpx

LOGGER = logging.getLogger(__name__)

_DROPPED_HEADERS = frozenset({"content-encoding", "content-length", "transfer-encoding", "connection"})


def recording_path(directory: Path, url: str) -> Path:
    """Location of the recording for ``url``."""

    return directory / f"{hashlib.sha256(url.encode('utf-8')).hexdigest()}.json"


def _write(path: Path, payload: dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class RecordingTransport(httpx.AsyncBaseTransport):
    """Forward requests to ``inner`` and store every exchange under ``directory``."""

    def __init__(self, directory: Path, inner: httpx.AsyncBaseTransport | None = None) -> None:
        self.directory = Path(directory)
        self._inner = inner or httpx.AsyncHTTPTransport(http2=True)

    async def handle_async_request(self, request: httpx.Request) -> httpx.Response:
        url = str(request.url)
        path = recording_path(self.directory, url)
        try:
            response = await self._inner.handle_async_request(request)
        except httpx.TimeoutException:
            _write(path, {"url": url, "error": "timeout"})
            raise
        except httpx.TransportError:
            _write(path, {"url": url, "error": "unreachable"})
            raise
        body = await response.aread()
        await response.aclose()
        headers = [[key, value] for key, value in response.headers.multi_items() if key.lower() not in _DROPPED_HEADERS]
        _write(
            path,
            {
                "url": url,
                "status": response.status_code,
                "headers": headers,
                "body": base64.b64encode(body).decode("ascii"),
            },
        )
        LOGGER.debug("Recorded %s (%s) to %s", url, response.status_code, path.name)
        return httpx.Response(response.status_code, headers=headers, content=body, request=request)

    async def aclose(self) -> None:
        await self._inner.aclose()


class ReplayTransport(httpx.AsyncBaseTransport):
    """Serve responses from recordings; unknown URLs fail as unreachable."""

    def __init__(self, directory: Path) -> None:
        self.directory = Path(directory)

    async def handle_async_request(self, request: httpx.Request) -> httpx.Response:
        url = str(request.url)
        path = recording_path(self.directory, url)
        if not path.exists():
            msg = f"No recording for {url}"
            raise httpx.ConnectError(msg, request=request)
        payload = json.loads(path.read_text(encoding="utf-8"))
        error = payload.get("error")
        if error == "timeout":
            msg = f"Recorded timeout for {url}"
            raise httpx.ReadTimeout(msg, request=request)
        if error is not None:
            msg = f"Recorded {error} for {url}"
            raise httpx.ConnectError(msg, request=request)
        return httpx.Response(
            int(payload["status"]),
            headers=[(key, value) for key, value in payload.get("headers", [])],
            content=base64.b64decode(payload.get("body", "")),
            request=request,
        )


__all__ = ["RecordingTransport", "ReplayTransport", "recording_path"]
