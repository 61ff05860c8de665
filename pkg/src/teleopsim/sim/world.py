"""World state: terrain, objects, robot, tasks, and the scenario loader.

A scenario file is YAML with sections: map, robot, objects, tasks, sim,
constraints. Small obstacles mirror their footprints into the map's
no-step cells; the protected-cell set for the stepping task is frozen at
load time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from ..errors import ParseError, WorldError
from ..footsteps import (
    Footstep,
    FootstepPlan,
    HeightMap,
    Side,
    StancePose,
    StepConstraints,
)
from ..geometry import Pose, quat_from_yaw
from ..kinematics import RobotModel, clamp_to_limits, JointState, load_default_model
from .params import SimParams


class ObjectKind(str, enum.Enum):
    SMALL_OBSTACLE = "small_obstacle"
    TABLE = "table"
    GRASPABLE_BOX = "graspable_box"
    VALVE = "valve"


class Mode(str, enum.Enum):
    IDLE = "idle"
    PLANNING = "planning"
    AWAITING_APPROVAL = "awaiting_approval"
    WALKING = "walking"
    MANIPULATING = "manipulating"


class TaskStatus(str, enum.Enum):
    INCOMPLETE = "incomplete"
    COMPLETE = "complete"
    VIOLATED = "violated"


WALK_TASK = "walk_to_pose"
AVOID_TASK = "avoid_objects"
PICKUP_TASK = "pick_up"
VALVE_TASK = "turn_valve"


@dataclass
class WorldObject:
    id: str
    kind: ObjectKind
    pose: Pose
    size: tuple[float, float, float] = (0.1, 0.1, 0.1)
    radius: float = 0.06           # obstacle footprint radius
    handle_radius: float = 0.15    # valve wheel radius
    angle: float = 0.0             # valve cumulative rotation, radians
    grasped_by: Side | None = None

    def clone(self) -> "WorldObject":
        return replace(self)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "kind": self.kind.value,
            "pose": self.pose.to_dict(),
            "size": list(self.size),
        }
        if self.kind is ObjectKind.SMALL_OBSTACLE:
            out["radius"] = self.radius
        if self.kind is ObjectKind.VALVE:
            out["handle_radius"] = self.handle_radius
            out["angle"] = self.angle
        if self.kind is ObjectKind.GRASPABLE_BOX:
            out["grasped_by"] = self.grasped_by.value if self.grasped_by else None
        return out


@dataclass
class JoystickState:
    vx: float
    vy: float
    wz: float
    last_refresh_tick: int


@dataclass
class SwingState:
    plan_id: str
    step_index: int
    side: Side
    from_x: float
    from_y: float
    from_yaw: float
    from_z: float
    target: Footstep
    progress: float = 0.0


@dataclass
class TaskParams:
    walk_goal: dict | None = None            # {x, y, yaw}
    walk_position_tolerance: float = 0.15
    walk_yaw_tolerance: float = 0.15
    avoid_enabled: bool = False
    pickup_object: str | None = None
    pickup_table: str | None = None
    pickup_lift_height: float = 0.10
    valve_object: str | None = None
    valve_target_angle: float = math.pi / 2

    def declared(self) -> list[str]:
        tasks = []
        if self.walk_goal is not None:
            tasks.append(WALK_TASK)
        if self.avoid_enabled:
            tasks.append(AVOID_TASK)
        if self.pickup_object is not None:
            tasks.append(PICKUP_TASK)
        if self.valve_object is not None:
            tasks.append(VALVE_TASK)
        return tasks


@dataclass
class RobotState:
    base: Pose
    stance: StancePose
    joints: dict[str, float]
    mode: Mode = Mode.IDLE
    active_plan_id: str | None = None
    step_index: int = 0
    step_progress: float = 0.0
    arm_targets: dict[str, dict | None] = field(
        default_factory=lambda: {"left": None, "right": None}
    )

    def clone(self) -> "RobotState":
        return RobotState(
            base=self.base,
            stance=self.stance,
            joints=dict(self.joints),
            mode=self.mode,
            active_plan_id=self.active_plan_id,
            step_index=self.step_index,
            step_progress=self.step_progress,
            arm_targets={k: (dict(v) if v else None) for k, v in self.arm_targets.items()},
        )


@dataclass
class GraspHold:
    object_id: str
    # box: object pose expressed in the palm frame at attach time
    offset: Pose | None = None
    # valve: wrist roll position at the previous tick
    wrist_ref: float = 0.0
    turned: float = 0.0


@dataclass
class WorldState:
    name: str
    grid: HeightMap
    model: RobotModel
    params: SimParams
    constraints: StepConstraints
    tasks: TaskParams
    objects: list[WorldObject]
    robot: RobotState
    battery: float = 100.0
    tick_count: int = 0
    task_flags: dict[str, TaskStatus] = field(default_factory=dict)

    # engine internals (cloned with the state, serialized only where noted)
    protected_cells: np.ndarray | None = None
    joint_setpoints: dict[str, float] = field(default_factory=dict)
    joystick: JoystickState | None = None
    plans: dict[str, FootstepPlan] = field(default_factory=dict)
    postures: dict[str, dict[str, float]] = field(default_factory=dict)
    pending_id: str | None = None
    active_posture_id: str | None = None
    swing: SwingState | None = None
    holds: dict[str, GraspHold] = field(default_factory=dict)  # by side value
    plan_counter: int = 0
    posture_counter: int = 0
    joystick_counter: int = 0
    event_seq: int = 0
    battery_low_sent: bool = False
    protected_hit: bool = False
    any_plan_done: bool = False

    def clone(self) -> "WorldState":
        return WorldState(
            name=self.name,
            grid=self.grid,
            model=self.model,
            params=self.params,
            constraints=self.constraints,
            tasks=self.tasks,
            objects=[o.clone() for o in self.objects],
            robot=self.robot.clone(),
            battery=self.battery,
            tick_count=self.tick_count,
            task_flags=dict(self.task_flags),
            protected_cells=self.protected_cells,
            joint_setpoints=dict(self.joint_setpoints),
            joystick=replace(self.joystick) if self.joystick else None,
            plans=dict(self.plans),
            postures={k: dict(v) for k, v in self.postures.items()},
            pending_id=self.pending_id,
            active_posture_id=self.active_posture_id,
            swing=replace(self.swing) if self.swing else None,
            holds={k: replace(v) for k, v in self.holds.items()},
            plan_counter=self.plan_counter,
            posture_counter=self.posture_counter,
            joystick_counter=self.joystick_counter,
            event_seq=self.event_seq,
            battery_low_sent=self.battery_low_sent,
            protected_hit=self.protected_hit,
            any_plan_done=self.any_plan_done,
        )

    def object_by_id(self, object_id: str) -> WorldObject:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise WorldError(f"no object {object_id!r}")

    def sim_time(self) -> float:
        return self.tick_count * self.params.dt


def nominal_stance(x: float, y: float, yaw: float, c: StepConstraints) -> StancePose:
    """Feet symmetric about (x, y) at nominal separation, facing yaw."""
    half = c.nominal_separation / 2.0
    sin, cos = math.sin(yaw), math.cos(yaw)
    return StancePose(
        left=Footstep(side=Side.LEFT, x=x - sin * half, y=y + cos * half, yaw=yaw),
        right=Footstep(side=Side.RIGHT, x=x + sin * half, y=y - cos * half, yaw=yaw),
    )


def base_pose_from_stance(stance: StancePose, params: SimParams) -> Pose:
    """Stance midpoint pose, lifted by the pelvis height."""
    x = (stance.left.x + stance.right.x) / 2.0
    y = (stance.left.y + stance.right.y) / 2.0
    z = (stance.left.z + stance.right.z) / 2.0 + params.pelvis_height
    yaw = math.atan2(
        math.sin(stance.left.yaw) + math.sin(stance.right.yaw),
        math.cos(stance.left.yaw) + math.cos(stance.right.yaw),
    )
    return Pose(np.array([x, y, z]), quat_from_yaw(yaw))


def _parse_pose(raw: dict) -> Pose:
    return Pose.from_dict(raw if isinstance(raw, dict) else {})


def load_world(document: str) -> WorldState:
    """Parse and validate a scenario document into an initial WorldState."""
    try:
        raw = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        raise ParseError(f"world document is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict) or "map" not in raw:
        raise ParseError("world document must be a mapping with a 'map' section")

    grid = HeightMap.from_dict(raw["map"])
    params = SimParams.from_dict(raw.get("sim", {}))
    constraints = (
        StepConstraints.from_dict(raw["constraints"])
        if "constraints" in raw
        else StepConstraints()
    )
    model = load_default_model()

    objects: list[WorldObject] = []
    seen_ids: set[str] = set()
    for entry in raw.get("objects", []):
        try:
            kind = ObjectKind(entry["kind"])
            obj = WorldObject(
                id=str(entry["id"]),
                kind=kind,
                pose=_parse_pose(entry.get("pose", {})),
                size=tuple(entry.get("size", (0.1, 0.1, 0.1))),
                radius=float(entry.get("radius", 0.06)),
                handle_radius=float(entry.get("handle_radius", 0.15)),
                angle=float(entry.get("angle", 0.0)),
            )
        except (KeyError, ValueError) as exc:
            raise ParseError(f"malformed object entry: {exc}") from exc
        if obj.id in seen_ids:
            raise WorldError(f"duplicate object id {obj.id!r}")
        seen_ids.add(obj.id)
        x, y = float(obj.pose.position[0]), float(obj.pose.position[1])
        if not grid.point_in_bounds(x, y):
            raise WorldError(f"object {obj.id!r} lies outside the map")
        objects.append(obj)

    # Small obstacles mirror into no-step cells; freeze the protected set.
    for obj in objects:
        if obj.kind is ObjectKind.SMALL_OBSTACLE:
            grid.mark_no_step_disk(
                float(obj.pose.position[0]), float(obj.pose.position[1]), obj.radius
            )
    protected = grid.no_step.copy()

    robot_raw = raw.get("robot", {})
    start = robot_raw.get("start", {"x": 0.0, "y": 0.0, "yaw": 0.0})
    stance = nominal_stance(
        float(start.get("x", 0.0)),
        float(start.get("y", 0.0)),
        float(start.get("yaw", 0.0)),
        constraints,
    )
    from ..footsteps import snap_footstep  # local import to avoid a cycle

    try:
        stance = StancePose(
            left=snap_footstep(grid, stance.left, constraints),
            right=snap_footstep(grid, stance.right, constraints),
        )
    except Exception as exc:
        raise WorldError(f"robot start stance is invalid: {exc}") from exc
    if not (stance.left.valid and stance.right.valid):
        raise WorldError("robot start stance rests on invalid terrain")

    joints = {name: 0.0 for name in model.joints}
    for name, value in (robot_raw.get("joints") or {}).items():
        if name not in model.joints:
            raise WorldError(f"unknown start joint {name!r}")
        joints[name] = float(value)
    joints = dict(
        clamp_to_limits(model, JointState(joints)).positions
    )

    tasks_raw = raw.get("tasks", {})
    tasks = TaskParams()
    if WALK_TASK in tasks_raw:
        t = tasks_raw[WALK_TASK] or {}
        goal = t.get("goal", {})
        tasks.walk_goal = {
            "x": float(goal.get("x", 0.0)),
            "y": float(goal.get("y", 0.0)),
            "yaw": float(goal.get("yaw", 0.0)),
        }
        tasks.walk_position_tolerance = float(t.get("position_tolerance", 0.15))
        tasks.walk_yaw_tolerance = float(t.get("yaw_tolerance", 0.15))
    if AVOID_TASK in tasks_raw:
        tasks.avoid_enabled = True
    if PICKUP_TASK in tasks_raw:
        t = tasks_raw[PICKUP_TASK] or {}
        tasks.pickup_object = str(t["object"])
        tasks.pickup_table = str(t["table"]) if "table" in t else None
        tasks.pickup_lift_height = float(t.get("lift_height", 0.10))
    if VALVE_TASK in tasks_raw:
        t = tasks_raw[VALVE_TASK] or {}
        tasks.valve_object = str(t["object"])
        tasks.valve_target_angle = float(t.get("target_angle", math.pi / 2))
    for task_name, object_id in (
        (PICKUP_TASK, tasks.pickup_object),
        (PICKUP_TASK, tasks.pickup_table),
        (VALVE_TASK, tasks.valve_object),
    ):
        if object_id is not None and object_id not in seen_ids:
            raise WorldError(f"{task_name} references unknown object {object_id!r}")

    robot = RobotState(
        base=base_pose_from_stance(stance, params),
        stance=stance,
        joints=joints,
    )
    state = WorldState(
        name=str(raw.get("name", "world")),
        grid=grid,
        model=model,
        params=params,
        constraints=constraints,
        tasks=tasks,
        objects=objects,
        robot=robot,
        protected_cells=protected,
        task_flags={name: TaskStatus.INCOMPLETE for name in tasks.declared()},
        joint_setpoints=dict(joints),
    )
    return state
