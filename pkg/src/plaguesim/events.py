"""Canonical NDJSON event serialization.

Events carry only simulation ticks, never wall-clock time, so two runs of
the same scenario and seed serialize to byte-identical logs.
"""

from __future__ import annotations

import json
from typing import Iterable, Iterator


def event_line(event: dict) -> str:
    return json.dumps(event, sort_keys=True, separators=(",", ":")) + "\n"


def write_ndjson(events: Iterable[dict], path: str) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(event_line(ev))
            count += 1
    return count


def read_ndjson(path: str) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def dumps(events: Iterable[dict]) -> str:
    return "".join(event_line(ev) for ev in events)
