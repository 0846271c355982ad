"""Small CSV helpers shared by the table loader, curve cache and CLI outputs.

Conventions: UTF-8 text, lines starting with '#' are comments, metadata is
carried in comments with ``key=value`` syntax.  Floats are written with
``repr`` so files round-trip bit-exactly and identical runs produce identical
bytes.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence


def fmt(value) -> str:
    """Render a value for CSV output (shortest round-trip form for floats)."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_comment_metadata(lines: Iterable[str]) -> dict[str, str]:
    """Extract ``key=value`` pairs from '#' comment lines."""
    meta: dict[str, str] = {}
    for line in lines:
        body = line.lstrip("#").strip()
        if "=" in body:
            key, _, value = body.partition("=")
            meta[key.strip()] = value.strip()
    return meta


def split_csv_text(text: str) -> tuple[list[str], list[str]]:
    """Split raw CSV text into (comment lines, non-empty data lines)."""
    comments, data = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line)
        else:
            data.append(line)
    return comments, data


def render_csv(header: str, rows: Iterable[Sequence], meta: dict | None = None) -> str:
    """Render a CSV document with leading '#' metadata comments."""
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key}={fmt(value)}")
    lines.append(header)
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file + rename so readers never see partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
