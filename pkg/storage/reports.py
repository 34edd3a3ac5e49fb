"""
Run reports and atomic file output.

A report is written in full or not at all: data goes to a temporary file
next to the target and is moved into place with os.replace.
"""

import csv
import hashlib
import io
import logging
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Iterable, Optional, Sequence

import orjson


logger = logging.getLogger(__name__)

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY

# fields that legitimately differ between identical runs
VOLATILE_FIELDS = ("duration_s", "created_at")


def _default(obj: Any):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if hasattr(obj, "value"):
        return obj.value
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"Cannot serialise {type(obj).__name__}")


def dumps(obj: Any) -> bytes:
    return orjson.dumps(obj, default=_default, option=JSON_OPTIONS)


@dataclass
class RunReport:
    """Everything needed to rerun a command and compare the result."""
    command: str
    argv: list
    config: dict
    seed: Optional[int]
    payload: dict
    duration_s: float = 0.0
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")
    )

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "argv": list(self.argv),
            "config": self.config,
            "seed": self.seed,
            "payload": self.payload,
            "duration_s": self.duration_s,
            "created_at": self.created_at,
        }

    def stable_dict(self) -> dict:
        out = self.to_dict()
        for key in VOLATILE_FIELDS:
            out.pop(key, None)
        return out

    def to_json(self) -> bytes:
        return dumps(self.to_dict())

    def digest(self) -> str:
        """SHA-256 of the run-independent part of the report."""
        return hashlib.sha256(dumps(self.stable_dict())).hexdigest()


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug(f"Wrote {len(data)} bytes to {path}")


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def rows_to_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buffer.getvalue()


def _csv_cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value") and not isinstance(value, (int, str)):
        return value.value
    return value


def write_report(report: RunReport, path: str) -> None:
    atomic_write_bytes(path, report.to_json())
    logger.info(f"Report for '{report.command}' written to {path}")


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    atomic_write_text(path, rows_to_csv(columns, rows))
    logger.info(f"CSV written to {path}")
