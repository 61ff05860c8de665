from .commands import (
    AbortWalk,
    ApprovePlan,
    ArmTarget,
    Command,
    EditFootstep,
    Fingers,
    JointNudge,
    JointSlider,
    Joystick,
    NeckTorso,
    RejectPlan,
    SetNavGoal,
    command_from_dict,
)
from .events import Event, EventKind
from .params import SimParams
from .world import (
    Mode,
    ObjectKind,
    RobotState,
    TaskStatus,
    WorldObject,
    WorldState,
    load_world,
)
from .engine import apply_command, apply_command_reported, check_grasp, snapshot, task_status, tick
from .scripting import RunReport, Script, load_script, run_script

__all__ = [
    "AbortWalk",
    "ApprovePlan",
    "ArmTarget",
    "Command",
    "EditFootstep",
    "Fingers",
    "JointNudge",
    "JointSlider",
    "Joystick",
    "NeckTorso",
    "RejectPlan",
    "SetNavGoal",
    "command_from_dict",
    "Event",
    "EventKind",
    "SimParams",
    "Mode",
    "ObjectKind",
    "RobotState",
    "TaskStatus",
    "WorldObject",
    "WorldState",
    "load_world",
    "apply_command",
    "apply_command_reported",
    "check_grasp",
    "snapshot",
    "task_status",
    "tick",
    "RunReport",
    "Script",
    "load_script",
    "run_script",
]
