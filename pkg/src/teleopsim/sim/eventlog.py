"""Newline-delimited JSON run log: header, commands, events, snapshots.

Every record is one JSON object per line with a "record" tag. The
determinism hash covers event records only (canonical JSON, sorted keys),
so two runs of the same scenario/script compare with one string.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import ParseError
from .events import Event


@dataclass
class RunLog:
    records: list[dict] = field(default_factory=list)

    def header(self, world_name: str, dt: float, extra: dict | None = None) -> None:
        record = {"record": "header", "version": 1, "world": world_name, "dt": dt}
        if extra:
            record.update(extra)
        self.records.append(record)

    def command(self, tick: int, source: str, seq: int, command_dict: dict) -> None:
        self.records.append(
            {
                "record": "command",
                "tick": tick,
                "source": source,
                "seq": seq,
                "command": command_dict,
            }
        )

    def event(self, event: Event) -> None:
        self.records.append({"record": "event", **event.to_dict()})

    def snapshot(self, snap: dict) -> None:
        self.records.append({"record": "snapshot", "snapshot": snap})

    def events(self) -> list[Event]:
        return [
            Event.from_dict(r) for r in self.records if r.get("record") == "event"
        ]

    def dumps(self) -> str:
        return "".join(
            json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n"
            for r in self.records
        )

    def write(self, path) -> None:
        with open(path, "w") as fp:
            fp.write(self.dumps())


def parse_log_text(text: str) -> RunLog:
    """Parse a run log; raises ParseError naming the offending line."""
    log = RunLog()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"corrupt log line {lineno}: {exc}") from exc
        if not isinstance(record, dict) or "record" not in record:
            raise ParseError(f"corrupt log line {lineno}: not a tagged record")
        log.records.append(record)
    return log


def read_log(path) -> RunLog:
    with open(path) as fp:
        return parse_log_text(fp.read())
