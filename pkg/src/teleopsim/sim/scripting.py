"""Headless scripted runs: timestamped commands plus inline assertions.

Scripts are YAML:

    name: walk_to_goal
    run_until: 500
    commands:
      - tick: 2
        command: {kind: set_nav_goal, x: 2.0, y: 0.0, yaw: 0.0, source: minimap}
      - tick: 6
        command: {kind: approve_plan, plan_id: plan-1}
    assertions:
      - tick: 480
        task: walk_to_pose
        status: complete

Ticks are simulation ticks (tick N fires after N fixed steps); plan and
posture ids are deterministic (plan-1, posture-1, ...) so scripts can name
them ahead of time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from ..errors import ParseError
from .commands import Command, command_from_dict, command_to_dict
from .engine import apply_command_reported, snapshot, tick
from .eventlog import RunLog
from .events import Event, event_log_hash
from .world import WorldState, load_world


@dataclass(frozen=True)
class ScriptCommand:
    tick: int
    command: Command


@dataclass(frozen=True)
class ScriptAssertion:
    tick: int
    task: str | None = None
    status: str | None = None
    mode: str | None = None


@dataclass(frozen=True)
class Script:
    name: str
    commands: tuple[ScriptCommand, ...]
    assertions: tuple[ScriptAssertion, ...]
    run_until: int


def load_script(text: str) -> Script:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"script is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("script document must be a mapping")
    commands = []
    for entry in raw.get("commands", []):
        try:
            commands.append(
                ScriptCommand(
                    tick=int(entry["tick"]),
                    command=command_from_dict(entry["command"]),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"malformed script command: {exc}") from exc
    commands.sort(key=lambda c: c.tick)
    assertions = []
    for entry in raw.get("assertions", []):
        try:
            assertions.append(
                ScriptAssertion(
                    tick=int(entry["tick"]),
                    task=entry.get("task"),
                    status=entry.get("status"),
                    mode=entry.get("mode"),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"malformed script assertion: {exc}") from exc
    last_tick = max(
        [c.tick for c in commands] + [a.tick for a in assertions] + [0]
    )
    run_until = int(raw.get("run_until", last_tick + 1))
    if run_until < last_tick:
        raise ParseError("run_until ends before the last scripted tick")
    return Script(
        name=str(raw.get("name", "script")),
        commands=tuple(commands),
        assertions=tuple(assertions),
        run_until=run_until,
    )


@dataclass
class RunReport:
    scenario: str
    script: str
    ticks: int
    tasks: dict[str, str]
    event_counts: dict[str, int]
    determinism_hash: str
    assertion_results: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.assertion_results)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "script": self.script,
            "ticks": self.ticks,
            "tasks": self.tasks,
            "event_counts": self.event_counts,
            "determinism_hash": self.determinism_hash,
            "assertions": self.assertion_results,
            "ok": self.ok,
        }


def _check_assertion(state: WorldState, assertion: ScriptAssertion) -> dict:
    ok = True
    detail = []
    if assertion.task is not None:
        actual = state.task_flags.get(assertion.task)
        actual_value = actual.value if actual else "undeclared"
        if actual_value != assertion.status:
            ok = False
        detail.append(f"task {assertion.task}={actual_value}")
    if assertion.mode is not None:
        if state.robot.mode.value != assertion.mode:
            ok = False
        detail.append(f"mode={state.robot.mode.value}")
    return {
        "tick": assertion.tick,
        "expected": {
            k: v
            for k, v in (
                ("task", assertion.task),
                ("status", assertion.status),
                ("mode", assertion.mode),
            )
            if v is not None
        },
        "actual": "; ".join(detail),
        "ok": ok,
    }


def run_script(
    world_text: str, script_text: str, log: RunLog | None = None
) -> RunReport:
    """Deterministic headless execution of a scripted scenario."""
    state = load_world(world_text)
    script = load_script(script_text)
    if log is not None:
        log.header(state.name, state.params.dt, {"script": script.name})

    all_events: list[Event] = []
    results: list[dict] = []
    pending_commands = list(script.commands)
    pending_assertions = list(script.assertions)
    seq = 0

    def fire_for_tick():
        nonlocal seq, state
        while pending_commands and pending_commands[0].tick <= state.tick_count:
            entry = pending_commands.pop(0)
            seq += 1
            meta = {"source": "script", "seq": seq}
            if log is not None:
                log.command(
                    state.tick_count, "script", seq, command_to_dict(entry.command)
                )
            state, events = apply_command_reported(state, entry.command, meta)
            all_events.extend(events)
            if log is not None:
                for event in events:
                    log.event(event)
        while pending_assertions and pending_assertions[0].tick <= state.tick_count:
            results.append(_check_assertion(state, pending_assertions.pop(0)))

    pending_assertions.sort(key=lambda a: a.tick)
    fire_for_tick()
    while state.tick_count < script.run_until:
        state, events = tick(state)
        all_events.extend(events)
        if log is not None:
            for event in events:
                log.event(event)
            if state.tick_count % state.params.snapshot_every == 0:
                log.snapshot(snapshot(state))
        fire_for_tick()

    if log is not None:
        log.snapshot(snapshot(state))

    counts: dict[str, int] = {}
    for event in all_events:
        counts[event.kind.value] = counts.get(event.kind.value, 0) + 1
    return RunReport(
        scenario=state.name,
        script=script.name,
        ticks=state.tick_count,
        tasks={k: v.value for k, v in state.task_flags.items()},
        event_counts=counts,
        determinism_hash=event_log_hash(all_events),
        assertion_results=results,
    )
