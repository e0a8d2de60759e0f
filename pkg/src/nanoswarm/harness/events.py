"""Append-only run event log with line-delimited JSON serialization."""

import json
from typing import Dict, Iterable, Iterator, List

FORMAT_VERSION = 1


class EventLog:
    """Timestamped records of everything that happened during one run.

    Records are plain dicts with a ``type`` field; timestamps are
    non-decreasing. The metrics pipeline consumes only this log, so replay
    from a serialized log reproduces the MissionReport exactly.
    """

    def __init__(self):
        self.records: List[dict] = []
        self._last_t = -1.0

    def append(self, record: dict) -> None:
        t = record.get("t")
        if t is not None:
            if t < self._last_t - 1e-12:
                raise ValueError(
                    f"non-monotonic event time {t} after {self._last_t}"
                )
            self._last_t = max(self._last_t, t)
        self.records.append(record)

    def __iter__(self) -> Iterator[dict]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def of_type(self, record_type: str) -> List[dict]:
        return [r for r in self.records if r["type"] == record_type]

    def header(self) -> dict:
        if not self.records or self.records[0]["type"] != "header":
            raise ValueError("event log has no header record")
        return self.records[0]

    def to_jsonl(self) -> str:
        return "\n".join(
            json.dumps(r, sort_keys=True, separators=(",", ":")) for r in self.records
        ) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "EventLog":
        log = cls()
        for line in text.splitlines():
            line = line.strip()
            if line:
                log.records.append(json.loads(line))
        return log

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def load(cls, path) -> "EventLog":
        with open(path) as fh:
            return cls.from_jsonl(fh.read())
