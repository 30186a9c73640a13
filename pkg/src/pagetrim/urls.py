"""URL canonicalization.

Every URL that crosses a module boundary (cache keys, inventory matching,
block lists) goes through :func:`normalize_url` so that textually different
references to the same resource compare equal.

Rules: scheme and host lowercased, default port dropped, fragment stripped,
query kept verbatim, path percent-encoding left untouched. Relative
references are resolved against a base URL.
"""

from __future__ import annotations

from urllib.parse import urljoin, urlsplit, urlunsplit

from .errors import MissingBaseError, UrlError

_DEFAULT_PORTS = {"http": 80, "https": 443, "ws": 80, "wss": 443, "ftp": 21}


def normalize_url(raw: str, base: str | None = None) -> str:
    """Return the canonical form of ``raw``, resolving against ``base`` if relative.

    Raises UrlError for unparseable input and MissingBaseError for a
    relative reference with no base.
    """
    if not isinstance(raw, str):
        raise UrlError(f"expected a URL string, got {type(raw).__name__}")
    raw = raw.strip()
    if not raw:
        raise UrlError("empty URL")

    try:
        parts = urlsplit(raw)
    except ValueError as exc:
        raise UrlError(f"malformed URL {raw!r}: {exc}") from None

    if not parts.scheme:
        if base is None:
            raise MissingBaseError(f"relative reference {raw!r} requires a base URL")
        raw = urljoin(base, raw)
        try:
            parts = urlsplit(raw)
        except ValueError as exc:
            raise UrlError(f"malformed URL {raw!r}: {exc}") from None
        if not parts.scheme:
            raise UrlError(f"base {base!r} did not yield an absolute URL for {raw!r}")

    scheme = parts.scheme.lower()

    try:
        host = parts.hostname  # lowercased by urlsplit
        port = parts.port
    except ValueError as exc:
        raise UrlError(f"malformed authority in {raw!r}: {exc}") from None

    netloc = ""
    if parts.netloc:
        if parts.username is not None:
            netloc = parts.username
            if parts.password is not None:
                netloc += f":{parts.password}"
            netloc += "@"
        netloc += host or ""
        if port is not None and port != _DEFAULT_PORTS.get(scheme):
            netloc += f":{port}"

    # Fragment dropped, everything else preserved byte-for-byte.
    return urlunsplit((scheme, netloc, parts.path, parts.query, ""))


def is_http_url(url: str) -> bool:
    """True for http(s) URLs; snapshots only ever store those."""
    return url.startswith("http://") or url.startswith("https://")
