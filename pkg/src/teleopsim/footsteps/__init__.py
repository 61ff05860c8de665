from .heightmap import HeightMap, load_height_map, save_height_map
from .plan import (
    Footstep,
    FootstepPlan,
    Goal2D,
    PlanStatus,
    Side,
    StancePose,
    StepConstraints,
    Violation,
    edit_footstep,
    snap_footstep,
    stance_midpoint,
    validate_plan,
    validate_transition,
)
from .planner import PlannerConfig, TransitionTemplate, plan_footsteps

__all__ = [
    "HeightMap",
    "load_height_map",
    "save_height_map",
    "Footstep",
    "FootstepPlan",
    "Goal2D",
    "PlanStatus",
    "Side",
    "StancePose",
    "StepConstraints",
    "Violation",
    "edit_footstep",
    "snap_footstep",
    "stance_midpoint",
    "validate_plan",
    "validate_transition",
    "PlannerConfig",
    "TransitionTemplate",
    "plan_footsteps",
]
