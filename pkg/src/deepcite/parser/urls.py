"""URL normalization used for citation deduplication."""

from __future__ import annotations

from urllib.parse import urlsplit, urlunsplit

DEFAULT_PORTS = {"http": 80, "https": 443}


class UrlRejectedError(ValueError):
    """Raised when a URL cannot be used as a citation target."""


def normalize_url(url: str) -> str:
    """Normalize an absolute ``http(s)`` URL.

    Scheme and host are lowercased, default ports and the fragment are dropped,
    and an empty path becomes ``/``.  Path and query are otherwise kept verbatim.

    Raises:
        UrlRejectedError: If ``url`` is relative, schemeless or not ``http(s)``.
    """

    candidate = url.strip()
    try:
        parts = urlsplit(candidate)
        port = parts.port
    except ValueError as exc:
        msg = f"Malformed URL {url!r}: {exc}"
        raise UrlRejectedError(msg) from exc
    scheme = parts.scheme.lower()
    if scheme not in DEFAULT_PORTS:
        msg = f"URL {url!r} is not an absolute http(s) URL"
        raise UrlRejectedError(msg)
    host = parts.hostname
    if not host:
        msg = f"URL {url!r} has no host"
        raise UrlRejectedError(msg)
    if ":" in host:
        host = f"[{host}]"
    userinfo, _, _ = parts.netloc.rpartition("@")
    netloc = f"{userinfo}@{host}" if userinfo else host
    if port is not None and port != DEFAULT_PORTS[scheme]:
        netloc = f"{netloc}:{port}"
    return urlunsplit((scheme, netloc, parts.path or "/", parts.query, ""))


__all__ = ["DEFAULT_PORTS", "UrlRejectedError", "normalize_url"]
