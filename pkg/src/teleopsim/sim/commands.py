"""Operator command variants and their wire representation.

Every command maps to a tagged dict ({"kind": ...}) used identically by
script files and the network protocol. Construction validates field
finiteness; decoding problems raise ValueError for the codec to wrap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from ..footsteps import Side
from ..geometry import Pose


def _require_finite(name: str, *values: float):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name}: non-finite numeric field")


@dataclass(frozen=True)
class SetNavGoal:
    x: float
    y: float
    yaw: float
    source: str = "pointer"  # pointer | minimap

    def __post_init__(self):
        _require_finite("SetNavGoal", self.x, self.y, self.yaw)
        if self.source not in ("pointer", "minimap"):
            raise ValueError(f"SetNavGoal: unknown source {self.source!r}")


@dataclass(frozen=True)
class Joystick:
    vx: float
    vy: float
    wz: float

    def __post_init__(self):
        _require_finite("Joystick", self.vx, self.vy, self.wz)


@dataclass(frozen=True)
class EditFootstep:
    plan_id: str
    index: int
    x: float
    y: float
    yaw: float

    def __post_init__(self):
        _require_finite("EditFootstep", self.x, self.y, self.yaw)


@dataclass(frozen=True)
class ApprovePlan:
    plan_id: str


@dataclass(frozen=True)
class RejectPlan:
    plan_id: str


@dataclass(frozen=True)
class ArmTarget:
    side: Side
    pose: Pose
    mode: str = "mimic"  # mimic | grab_marker

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        if self.mode not in ("mimic", "grab_marker"):
            raise ValueError(f"ArmTarget: unknown mode {self.mode!r}")


@dataclass(frozen=True)
class JointSlider:
    joint: str
    position: float

    def __post_init__(self):
        _require_finite("JointSlider", self.position)


@dataclass(frozen=True)
class JointNudge:
    joint: str
    delta: float

    def __post_init__(self):
        _require_finite("JointNudge", self.delta)


@dataclass(frozen=True)
class Fingers:
    side: Side
    closure: tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        closure = tuple(float(v) for v in self.closure)
        if len(closure) != 4:
            raise ValueError("Fingers: closure must have 4 entries")
        _require_finite("Fingers", *closure)
        object.__setattr__(self, "closure", closure)


@dataclass(frozen=True)
class NeckTorso:
    positions: dict[str, float]

    def __post_init__(self):
        positions = {str(k): float(v) for k, v in self.positions.items()}
        _require_finite("NeckTorso", *positions.values())
        object.__setattr__(self, "positions", positions)


@dataclass(frozen=True)
class AbortWalk:
    pass


Command = (
    SetNavGoal
    | Joystick
    | EditFootstep
    | ApprovePlan
    | RejectPlan
    | ArmTarget
    | JointSlider
    | JointNudge
    | Fingers
    | NeckTorso
    | AbortWalk
)

_KIND_TO_CLASS = {
    "set_nav_goal": SetNavGoal,
    "joystick": Joystick,
    "edit_footstep": EditFootstep,
    "approve_plan": ApprovePlan,
    "reject_plan": RejectPlan,
    "arm_target": ArmTarget,
    "joint_slider": JointSlider,
    "joint_nudge": JointNudge,
    "fingers": Fingers,
    "neck_torso": NeckTorso,
    "abort_walk": AbortWalk,
}
_CLASS_TO_KIND = {cls: kind for kind, cls in _KIND_TO_CLASS.items()}


def command_to_dict(cmd: Command) -> dict:
    kind = _CLASS_TO_KIND[type(cmd)]
    out: dict = {"kind": kind}
    if isinstance(cmd, ArmTarget):
        out["side"] = cmd.side.value
        out["pose"] = cmd.pose.to_dict()
        out["mode"] = cmd.mode
        return out
    for f in fields(cmd):
        value = getattr(cmd, f.name)
        if isinstance(value, Side):
            value = value.value
        elif isinstance(value, tuple):
            value = list(value)
        elif isinstance(value, dict):
            value = dict(value)
        out[f.name] = value
    return out


def command_from_dict(raw: dict) -> Command:
    if not isinstance(raw, dict):
        raise ValueError("command payload must be a mapping")
    kind = raw.get("kind")
    cls = _KIND_TO_CLASS.get(kind)
    if cls is None:
        raise ValueError(f"unknown command kind {kind!r}")
    body = {k: v for k, v in raw.items() if k != "kind"}
    try:
        if cls is ArmTarget:
            return ArmTarget(
                side=Side(body["side"]),
                pose=Pose.from_dict(body["pose"]),
                mode=body.get("mode", "mimic"),
            )
        if cls is Fingers:
            return Fingers(side=Side(body["side"]), closure=tuple(body["closure"]))
        return cls(**body)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed {kind} command: {exc}") from exc
