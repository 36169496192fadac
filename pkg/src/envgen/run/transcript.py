"""Append-only JSONL run transcript and metrics streams.

Events carry logical step stamps only (no wall-clock), so two identical runs
produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path


class TranscriptWriter:
    """Run-level events: cycles, prompts, bundles, reports, scores."""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self.events: list[dict] = []
        self._fh = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self.path.open("w")

    def event(self, _event: str, **fields) -> dict:
        record = {"event": _event, **fields}
        self.events.append(record)
        if self._fh is not None:
            self._fh.write(json.dumps(record) + "\n")
            self._fh.flush()
        return record

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


class MetricsWriter:
    """Per-update training stats and achievement unlock events."""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._fh = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self.path.open("w")

    def update(self, gstep: int, phase: str, stats) -> None:
        self._write({"type": "update", "gstep": gstep, "phase": phase, **stats.to_dict()})

    def unlock(self, gstep: int, phase: str, slot: int, achievement: str) -> None:
        self._write(
            {"type": "unlock", "gstep": gstep, "phase": phase, "slot": slot,
             "achievement": achievement}
        )

    def _write(self, record: dict) -> None:
        if self._fh is not None:
            self._fh.write(json.dumps(record) + "\n")
            self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_jsonl(path) -> list[dict]:
    path = Path(path)
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
