"""Append-only JSON-lines event log.

One record per block/transaction/event/receipt, with fixed field order, so two
identical runs produce byte-identical files and a log can be replayed to
reconstruct ledger state.
"""
from __future__ import annotations

import json
from pathlib import Path

from .types import Address


def jsonify(value):
    """Convert a record value into a JSON-stable shape. Addresses become hex
    strings; tuples become lists; dicts keep insertion order."""
    if isinstance(value, Address):
        return value.hex
    if isinstance(value, dict):
        return {k: jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonify(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    raise TypeError(f"cannot serialize {type(value).__name__} into the event log")


def encode_line(record: dict) -> str:
    return json.dumps(jsonify(record), separators=(",", ":"))


class EventLog:
    """Collects records in memory and optionally appends them to a file."""

    def __init__(self, path: str | Path | None = None, append: bool = False):
        self.records: list[dict] = []
        self.path = Path(path) if path is not None else None
        self._fh = None
        if self.path is not None:
            self._fh = open(self.path, "a" if append else "w")

    def write(self, record: dict):
        record = jsonify(record)
        self.records.append(record)
        if self._fh is not None:
            self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")
            self._fh.flush()

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @staticmethod
    def read(path: str | Path) -> list[dict]:
        records = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return records
