"""Shared file helpers: atomic writes, JSONL framing, hashing.

All text artifacts are UTF-8 with LF line endings regardless of platform.
Writers go through a temp file in the target directory and rename into
place, so a crash never leaves a truncated artifact under the final name.
"""

from __future__ import annotations

import hashlib
import json
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import DataError


@contextmanager
def atomic_write(path: str | Path, binary: bool = False):
    """Open <path>.tmp for writing and rename over path on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    mode = "wb" if binary else "w"
    kwargs = {} if binary else {"encoding": "utf-8", "newline": "\n"}
    try:
        with open(tmp, mode, **kwargs) as handle:
            yield handle
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, Any]]:
    """Yield (lineno, parsed object) for each non-blank line of a JSONL file."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    """Write one compact JSON object per line. Returns the record count."""
    count = 0
    with atomic_write(path) as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            handle.write("\n")
            count += 1
    return count


def require_field(obj: dict, field: str, kind: type, where: str) -> Any:
    """Fetch a typed field from a decoded JSONL record or raise DataError."""
    if not isinstance(obj, dict):
        raise DataError(f"{where}: expected a JSON object")
    if field not in obj:
        raise DataError(f"{where}: missing field '{field}'")
    value = obj[field]
    if kind is int and isinstance(value, bool):
        raise DataError(f"{where}: field '{field}' must be {kind.__name__}")
    if not isinstance(value, kind):
        raise DataError(f"{where}: field '{field}' must be {kind.__name__}")
    return value


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
