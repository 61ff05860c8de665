"""Footstep domain types, terrain snapping, and plan validation/editing.

Plans are immutable values: editing returns a new plan. Operator authority
is deliberate policy here — an edit that violates constraints is flagged on
the affected steps, never reverted.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import (
    IndexOutOfRange,
    LifecycleError,
    OutOfBounds,
    PlanLocked,
    SameSide,
)
from ..geometry import wrap_angle
from .heightmap import HeightMap


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def opposite(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


class Violation(str, enum.Enum):
    NO_STEP_CELL = "NO_STEP_CELL"
    HEIGHT_SPREAD = "HEIGHT_SPREAD"
    OUT_OF_BOUNDS = "OUT_OF_BOUNDS"
    OUT_OF_REACH_FORWARD = "OUT_OF_REACH_FORWARD"
    OUT_OF_REACH_BACKWARD = "OUT_OF_REACH_BACKWARD"
    OUT_OF_REACH_LATERAL = "OUT_OF_REACH_LATERAL"
    CROSSED_FEET = "CROSSED_FEET"
    YAW_EXCEEDED = "YAW_EXCEEDED"
    ALTERNATION = "ALTERNATION"


class PlanStatus(str, enum.Enum):
    PROPOSED = "proposed"
    EDITED = "edited"
    APPROVED = "approved"
    REJECTED = "rejected"
    EXECUTING = "executing"
    DONE = "done"
    ABORTED = "aborted"


_STATUS_GRAPH: dict[PlanStatus, frozenset[PlanStatus]] = {
    PlanStatus.PROPOSED: frozenset(
        {PlanStatus.EDITED, PlanStatus.APPROVED, PlanStatus.REJECTED}
    ),
    PlanStatus.EDITED: frozenset(
        {PlanStatus.EDITED, PlanStatus.APPROVED, PlanStatus.REJECTED}
    ),
    PlanStatus.APPROVED: frozenset({PlanStatus.EXECUTING}),
    PlanStatus.EXECUTING: frozenset({PlanStatus.DONE, PlanStatus.ABORTED}),
    PlanStatus.REJECTED: frozenset(),
    PlanStatus.DONE: frozenset(),
    PlanStatus.ABORTED: frozenset(),
}

EDITABLE_STATUSES = (PlanStatus.PROPOSED, PlanStatus.EDITED)


@dataclass(frozen=True)
class StepConstraints:
    """Step-to-step feasibility bounds and footprint geometry (meters, radians)."""

    max_forward: float = 0.40
    max_backward: float = 0.15
    min_lateral_separation: float = 0.15
    max_lateral: float = 0.35
    max_yaw_per_step: float = 0.30
    foot_length: float = 0.27
    foot_width: float = 0.16
    max_height_delta: float = 0.05
    goal_position_tolerance: float = 0.10
    goal_yaw_tolerance: float = 0.10

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if getattr(self, name) <= 0:
                raise ValueError(f"StepConstraints.{name} must be positive")
        if self.min_lateral_separation >= self.max_lateral:
            raise ValueError("min_lateral_separation must be < max_lateral")

    @property
    def nominal_separation(self) -> float:
        return (self.min_lateral_separation + self.max_lateral) / 2.0

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, raw: dict) -> "StepConstraints":
        return cls(**{k: float(v) for k, v in raw.items()})


@dataclass(frozen=True)
class Footstep:
    side: Side
    x: float
    y: float
    yaw: float
    z: float = 0.0
    valid: bool = True
    violations: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))
        object.__setattr__(
            self, "violations", tuple(str(v) for v in self.violations)
        )

    def to_dict(self) -> dict:
        return {
            "side": self.side.value,
            "x": self.x,
            "y": self.y,
            "yaw": self.yaw,
            "z": self.z,
            "valid": self.valid,
            "violations": list(self.violations),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Footstep":
        return cls(
            side=Side(raw["side"]),
            x=float(raw["x"]),
            y=float(raw["y"]),
            yaw=float(raw["yaw"]),
            z=float(raw.get("z", 0.0)),
            valid=bool(raw.get("valid", True)),
            violations=tuple(raw.get("violations", ())),
        )


@dataclass(frozen=True)
class StancePose:
    left: Footstep
    right: Footstep

    def __post_init__(self):
        if self.left.side is not Side.LEFT or self.right.side is not Side.RIGHT:
            raise ValueError("stance feet must be (left, right) in that order")

    def foot(self, side: Side) -> Footstep:
        return self.left if side is Side.LEFT else self.right

    def to_dict(self) -> dict:
        return {"left": self.left.to_dict(), "right": self.right.to_dict()}

    @classmethod
    def from_dict(cls, raw: dict) -> "StancePose":
        return cls(
            left=Footstep.from_dict(raw["left"]),
            right=Footstep.from_dict(raw["right"]),
        )


def stance_midpoint(stance: StancePose) -> tuple[float, float, float]:
    """Stance center: mean foot position, circular-mean yaw."""
    x = (stance.left.x + stance.right.x) / 2.0
    y = (stance.left.y + stance.right.y) / 2.0
    yaw = math.atan2(
        math.sin(stance.left.yaw) + math.sin(stance.right.yaw),
        math.cos(stance.left.yaw) + math.cos(stance.right.yaw),
    )
    return x, y, yaw


def feet_overlap(a: Footstep, b: Footstep, c: StepConstraints) -> bool:
    """Oriented-rectangle intersection test (separating axis)."""
    half = np.array([c.foot_length / 2.0, c.foot_width / 2.0])
    axes = []
    for yaw in (a.yaw, b.yaw):
        cos, sin = math.cos(yaw), math.sin(yaw)
        axes.append(np.array([cos, sin]))
        axes.append(np.array([-sin, cos]))
    corners_a = _corners(a, half)
    corners_b = _corners(b, half)
    for axis in axes:
        pa = corners_a @ axis
        pb = corners_b @ axis
        if pa.max() < pb.min() or pb.max() < pa.min():
            return False
    return True


def _corners(step: Footstep, half: np.ndarray) -> np.ndarray:
    cos, sin = math.cos(step.yaw), math.sin(step.yaw)
    rot = np.array([[cos, -sin], [sin, cos]])
    offsets = np.array(
        [
            [half[0], half[1]],
            [half[0], -half[1]],
            [-half[0], -half[1]],
            [-half[0], half[1]],
        ]
    )
    return offsets @ rot.T + np.array([step.x, step.y])


@dataclass(frozen=True)
class Goal2D:
    x: float
    y: float
    yaw: float

    def __post_init__(self):
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "yaw": self.yaw}

    @classmethod
    def from_dict(cls, raw: dict) -> "Goal2D":
        return cls(float(raw["x"]), float(raw["y"]), float(raw["yaw"]))


@dataclass(frozen=True)
class FootstepPlan:
    id: str
    goal: Goal2D
    steps: tuple[Footstep, ...]
    status: PlanStatus = PlanStatus.PROPOSED
    start: StancePose | None = None

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "status", PlanStatus(self.status))

    def with_status(self, new: PlanStatus) -> "FootstepPlan":
        new = PlanStatus(new)
        if new not in _STATUS_GRAPH[self.status]:
            raise LifecycleError(
                f"plan {self.id}: illegal status transition "
                f"{self.status.value} -> {new.value}"
            )
        return replace(self, status=new)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "goal": self.goal.to_dict(),
            "status": self.status.value,
            "steps": [s.to_dict() for s in self.steps],
        }
        if self.start is not None:
            out["start"] = self.start.to_dict()
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "FootstepPlan":
        return cls(
            id=str(raw["id"]),
            goal=Goal2D.from_dict(raw["goal"]),
            steps=tuple(Footstep.from_dict(s) for s in raw["steps"]),
            status=PlanStatus(raw.get("status", "proposed")),
            start=StancePose.from_dict(raw["start"]) if raw.get("start") else None,
        )


# -- operations --------------------------------------------------------------

def snap_footstep(
    grid: HeightMap, step: Footstep, c: StepConstraints = StepConstraints()
) -> Footstep:
    """Project a footstep onto the terrain.

    z becomes the mean elevation over the covered cells. The step is marked
    invalid (with codes) when it covers a no-step cell or the elevation
    spread exceeds max_height_delta. Raises OutOfBounds when the footprint
    leaves the map.
    """
    in_bounds, z, no_step_hit, spread_exceeded = grid.probe_footprint(
        step.x, step.y, step.yaw, c.foot_length, c.foot_width, c.max_height_delta
    )
    if not in_bounds:
        raise OutOfBounds(
            f"footprint at ({step.x:.3f}, {step.y:.3f}, yaw {step.yaw:.3f}) leaves the map"
        )
    violations = []
    if no_step_hit:
        violations.append(Violation.NO_STEP_CELL.value)
    if spread_exceeded:
        violations.append(Violation.HEIGHT_SPREAD.value)
    return replace(
        step,
        z=z,
        valid=not violations,
        violations=tuple(violations),
    )


# Guard against float round-trip noise when a step sits exactly on a bound
# (planner templates place feet at the bounds by construction).
_BOUND_EPS = 1e-9


def validate_transition(
    stance_foot: Footstep, candidate: Footstep, c: StepConstraints
) -> list[Violation]:
    """Feasibility of placing ``candidate`` while standing on ``stance_foot``.

    The candidate is expressed in the stance foot's frame; an empty list
    means the placement satisfies the forward/backward/lateral/yaw bounds
    and stays on its own side of the stance foot.
    """
    if stance_foot.side is candidate.side:
        raise SameSide("transition requires opposite feet")
    cos = math.cos(stance_foot.yaw)
    sin = math.sin(stance_foot.yaw)
    rel_x = candidate.x - stance_foot.x
    rel_y = candidate.y - stance_foot.y
    dx = cos * rel_x + sin * rel_y
    dy = -sin * rel_x + cos * rel_y
    dyaw = wrap_angle(candidate.yaw - stance_foot.yaw)

    violations: list[Violation] = []
    if dx > c.max_forward + _BOUND_EPS:
        violations.append(Violation.OUT_OF_REACH_FORWARD)
    if dx < -c.max_backward - _BOUND_EPS:
        violations.append(Violation.OUT_OF_REACH_BACKWARD)
    # Positive lateral = away from the stance foot on the swing side.
    lateral = -dy if stance_foot.side is Side.LEFT else dy
    if lateral > c.max_lateral + _BOUND_EPS:
        violations.append(Violation.OUT_OF_REACH_LATERAL)
    if lateral < c.min_lateral_separation - _BOUND_EPS:
        violations.append(Violation.CROSSED_FEET)
    if abs(dyaw) > c.max_yaw_per_step + _BOUND_EPS:
        violations.append(Violation.YAW_EXCEEDED)
    return violations


def _support_foot(
    plan_steps: tuple[Footstep, ...], index: int, start: StancePose | None
) -> Footstep | None:
    """Foot the robot stands on while placing step ``index``."""
    if index > 0:
        return plan_steps[index - 1]
    if start is not None:
        return start.foot(plan_steps[0].side.opposite)
    return None


def _annotate_step(
    grid: HeightMap,
    steps: tuple[Footstep, ...],
    index: int,
    start: StancePose | None,
    c: StepConstraints,
) -> Footstep:
    """Recompute snap and incoming-transition violations for one step."""
    step = steps[index]
    try:
        snapped = snap_footstep(grid, replace(step, violations=(), valid=True), c)
    except OutOfBounds:
        snapped = replace(
            step, valid=False, violations=(Violation.OUT_OF_BOUNDS.value,)
        )
    codes = list(snapped.violations)
    support = _support_foot(steps, index, start)
    if support is not None:
        if support.side is step.side:
            codes.append(Violation.ALTERNATION.value)
        else:
            codes.extend(v.value for v in validate_transition(support, snapped, c))
    return replace(snapped, valid=not codes, violations=tuple(codes))


def edit_footstep(
    grid: HeightMap,
    plan: FootstepPlan,
    index: int,
    new_pose: Goal2D | dict,
    c: StepConstraints = StepConstraints(),
) -> FootstepPlan:
    """Move one footstep; re-snap it and re-validate it and its successor.

    The edit always sticks — constraint violations are recorded on the
    affected steps, not rejected — because the operator may deliberately
    override the planner (wider stance, sidestepping a missed obstacle).
    """
    if plan.status not in EDITABLE_STATUSES:
        raise PlanLocked(f"plan {plan.id} is {plan.status.value}, not editable")
    if not 0 <= index < len(plan.steps):
        raise IndexOutOfRange(f"step index {index} outside plan of {len(plan.steps)}")
    pose = Goal2D.from_dict(new_pose) if isinstance(new_pose, dict) else new_pose

    steps = list(plan.steps)
    steps[index] = replace(
        steps[index], x=pose.x, y=pose.y, yaw=pose.yaw, valid=True, violations=()
    )
    frozen = tuple(steps)
    steps[index] = _annotate_step(grid, frozen, index, plan.start, c)
    if index + 1 < len(steps):
        frozen = tuple(steps)
        steps[index + 1] = _annotate_step(grid, frozen, index + 1, plan.start, c)
    return replace(plan, steps=tuple(steps), status=PlanStatus.EDITED)


def validate_plan(
    grid: HeightMap,
    plan: FootstepPlan,
    start: StancePose | None = None,
    c: StepConstraints = StepConstraints(),
) -> list[tuple[int, str]]:
    """Full-plan report: (step index, violation code) pairs, empty iff
    the plan is executable. Never raises; out-of-bounds steps are reported.
    """
    start = start if start is not None else plan.start
    report: list[tuple[int, str]] = []
    for index in range(len(plan.steps)):
        annotated = _annotate_step(grid, plan.steps, index, start, c)
        for code in annotated.violations:
            report.append((index, code))
    return report
