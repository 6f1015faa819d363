"""Fingerprint cache files: JSON Lines with a header recording the configuration digest."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .model import ConvoshapeError, Fingerprint, ParseError

FORMAT_VERSION = 1
CACHE_SUFFIX = ".fp.jsonl"


class CacheMismatch(ConvoshapeError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the same directory so a failure never leaves a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_cache(fingerprints: Iterable[Fingerprint], digest: str,
                 vocabularies: Optional[Sequence[Sequence[str]]] = None) -> str:
    lines = [_dumps({"config_digest": digest, "format_version": FORMAT_VERSION})]
    for i, fp in enumerate(fingerprints):
        record = fp.to_dict()
        if vocabularies is not None:
            record["vocab"] = list(vocabularies[i])
        lines.append(_dumps(record))
    return "\n".join(lines) + "\n"


def write_cache(path, fingerprints: Iterable[Fingerprint], digest: str,
                vocabularies: Optional[Sequence[Sequence[str]]] = None) -> None:
    atomic_write(path, render_cache(fingerprints, digest, vocabularies))


def read_header(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    try:
        header = json.loads(first)
    except json.JSONDecodeError as exc:
        raise ParseError(f"unreadable cache header: {exc.msg}", 1, str(path)) from exc
    if not isinstance(header, dict) or "config_digest" not in header:
        raise ParseError("cache header lacks config_digest", 1, str(path))
    if header.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"unsupported cache format {header.get('format_version')!r}", 1, str(path))
    return header


def read_cache(path, expected_digest: Optional[str] = None) -> list[Fingerprint]:
    path = Path(path)
    if not path.is_file():
        raise ConvoshapeError(f"cache not found: {path}")
    header = read_header(path)
    if expected_digest is not None and header["config_digest"] != expected_digest:
        raise CacheMismatch(f"{path}: cache built with a different configuration")
    out = []
    with open(path, encoding="utf-8") as fh:
        fh.readline()
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                out.append(Fingerprint.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise ParseError(f"bad fingerprint record ({exc})", lineno, str(path)) from exc
    return out


def is_current(path, digest: str) -> bool:
    try:
        return read_header(path)["config_digest"] == digest
    except (OSError, ConvoshapeError):
        return False


def corpus_name(path) -> str:
    name = Path(path).name
    for suffix in (CACHE_SUFFIX, ".jsonl", ".json"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return Path(path).stem
