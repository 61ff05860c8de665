"""Simulator events: totally ordered, serializable, replayable."""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field


class EventKind(str, enum.Enum):
    PLAN_PROPOSED = "plan_proposed"
    PLAN_STATUS_CHANGED = "plan_status_changed"
    STEP_STARTED = "step_started"
    STEP_COMPLETED = "step_completed"
    GRASP_ATTACHED = "grasp_attached"
    GRASP_RELEASED = "grasp_released"
    VALVE_TURNED = "valve_turned"
    TASK_COMPLETED = "task_completed"
    COMMAND_REJECTED = "command_rejected"
    BATTERY_LOW = "battery_low"


@dataclass(frozen=True)
class Event:
    tick: int
    seq: int
    kind: EventKind
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "seq": self.seq,
            "kind": self.kind.value,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Event":
        return cls(
            tick=int(raw["tick"]),
            seq=int(raw["seq"]),
            kind=EventKind(raw["kind"]),
            payload=dict(raw.get("payload", {})),
        )


def canonical_event_line(event: Event) -> str:
    return json.dumps(event.to_dict(), sort_keys=True, separators=(",", ":"))


def event_log_hash(events: list[Event]) -> str:
    digest = hashlib.sha256()
    for event in events:
        digest.update(canonical_event_line(event).encode())
        digest.update(b"\n")
    return digest.hexdigest()
