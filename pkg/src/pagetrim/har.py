"""HAR 1.2 parsing: the ingestion path that replaces live browser capture."""

from __future__ import annotations

import base64
import binascii
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import HarImportError, UrlError
from .extract import NetworkLogEntry
from .urls import normalize_url


@dataclass(frozen=True)
class HarEntry:
    url: str  # canonical
    status: int
    media_type: str
    headers: tuple[tuple[str, str], ...]
    body: bytes
    initiator_url: Optional[str]


def _initiator_from(entry: dict) -> Optional[str]:
    initiator = entry.get("_initiator")
    if not isinstance(initiator, dict):
        return None
    url = initiator.get("url")
    if not url:
        stack = initiator.get("stack") or {}
        frames = stack.get("callFrames") or []
        url = frames[0].get("url") if frames else None
    if not url:
        return None
    try:
        return normalize_url(url)
    except UrlError:
        return None


def parse_har(path: str | Path) -> list[HarEntry]:
    """Read a HAR file into entries, decoding base64 bodies.

    Entries keep file order; duplicate URLs keep the first occurrence.
    Raises HarImportError naming the failing entry index.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise HarImportError(f"cannot read HAR file: {exc}") from None
    try:
        raw_entries = data["log"]["entries"]
    except (TypeError, KeyError):
        raise HarImportError("missing log.entries") from None

    out: list[HarEntry] = []
    seen: set[str] = set()
    for index, entry in enumerate(raw_entries):
        try:
            url = normalize_url(entry["request"]["url"])
            response = entry["response"]
            status = int(response.get("status", 0))
            content = response.get("content") or {}
            media_type = str(content.get("mimeType", "")).split(";", 1)[0].strip()
            text = content.get("text", "")
            if content.get("encoding") == "base64":
                body = base64.b64decode(text, validate=True)
            else:
                body = text.encode("utf-8") if isinstance(text, str) else b""
            headers = tuple(
                (str(h.get("name", "")), str(h.get("value", "")))
                for h in response.get("headers", [])
            )
        except (KeyError, TypeError, ValueError, UrlError, binascii.Error) as exc:
            raise HarImportError(str(exc), entry_index=index) from None
        if url in seen:
            continue
        seen.add(url)
        out.append(
            HarEntry(
                url=url,
                status=status,
                media_type=media_type,
                headers=headers,
                body=body,
                initiator_url=_initiator_from(entry),
            )
        )
    return out


def har_network_log(path: str | Path) -> list[NetworkLogEntry]:
    """Map HAR entries to network log lines (initiators where present)."""
    return [
        NetworkLogEntry(
            url=e.url,
            media_type=e.media_type,
            initiator_url=e.initiator_url,
            byte_size=len(e.body),
        )
        for e in parse_har(path)
    ]
