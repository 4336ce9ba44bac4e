"""Line-delimited JSON helpers shared by every file format in the toolkit.

All record files are JSON Lines: one object per line, blank lines ignored.
Writers stamp a ``schema_version`` field; readers tolerate its absence so
hand-written fixtures stay terse.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Any, Iterable, Iterator, Union

Target = Union[str, Path, IO[str]]

SCHEMA_VERSION = 1


class SchemaError(Exception):
    """An input file violates the expected record schema."""

    def __init__(self, message: str, *, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += str(path)
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, object) pairs; line numbers are 1-based."""
    with open(path, encoding="utf-8") as fp:
        for lineno, raw in enumerate(fp, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON ({exc.msg})", line=lineno, path=str(path)) from exc
            if not isinstance(obj, dict):
                raise SchemaError("expected a JSON object", line=lineno, path=str(path))
            yield lineno, obj


def write_jsonl(target: Target, rows: Iterable[dict]) -> None:
    """Write rows line by line; accepts a path or an open text handle."""
    if hasattr(target, "write"):
        for row in rows:
            target.write(json.dumps(row) + "\n")  # type: ignore[union-attr]
        return
    with open(target, "w", encoding="utf-8") as fp:  # type: ignore[arg-type]
        for row in rows:
            fp.write(json.dumps(row) + "\n")


def field(obj: dict, key: str, kind: type | tuple[type, ...], *, line: int | None = None,
          path: str | None = None, optional: bool = False, default: Any = None) -> Any:
    """Fetch and type-check one field of a JSONL record."""
    if key not in obj:
        if optional:
            return default
        raise SchemaError(f"missing field {key!r}", line=line, path=path)
    value = obj[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise SchemaError(f"field {key!r} has wrong type (got {type(value).__name__})",
                          line=line, path=path)
    return value
