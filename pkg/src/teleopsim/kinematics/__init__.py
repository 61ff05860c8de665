from .model import (
    ChainSpec,
    JointSpec,
    JointState,
    RobotModel,
    clamp_to_limits,
    default_model_text,
    load_default_model,
    load_robot_model,
)
from .solver import (
    IkParams,
    IkResult,
    IkStatus,
    forward_kinematics,
    jacobian,
    solve_ik,
)

__all__ = [
    "ChainSpec",
    "JointSpec",
    "JointState",
    "RobotModel",
    "clamp_to_limits",
    "default_model_text",
    "load_default_model",
    "load_robot_model",
    "IkParams",
    "IkResult",
    "IkStatus",
    "forward_kinematics",
    "jacobian",
    "solve_ik",
]
