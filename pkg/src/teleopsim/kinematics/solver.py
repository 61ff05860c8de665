"""Forward kinematics, geometric Jacobian, and damped-least-squares IK.

Chains are resolved to their full base-to-tip joint path. Joints on the
path that are not chain columns (e.g. the torso below the neck chain) are
held at their current positions and contribute fixed transforms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..geometry import Pose, orientation_error, rot_from_quat
from .model import JointState, RobotModel, _CompiledChain


@dataclass(frozen=True)
class IkParams:
    damping: float = 0.05
    max_iterations: int = 200
    position_tolerance: float = 1e-3
    orientation_tolerance: float = 1e-2
    step_scale: float = 1.0

    def __post_init__(self):
        if self.damping <= 0 or self.position_tolerance <= 0 or self.orientation_tolerance <= 0:
            raise ValueError("IkParams fields must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0.0 < self.step_scale <= 1.0:
            raise ValueError("step_scale must lie in (0, 1]")


class IkStatus(enum.Enum):
    SUCCESS = "success"
    NO_CONVERGENCE = "no_convergence"
    UNREACHABLE = "unreachable"


# Error magnitudes fed into a single DLS step are capped so distant targets
# cannot cause overshoot; convergence checks always use the uncapped error.
_POS_ERROR_CLAMP = 0.2
_ROT_ERROR_CLAMP = 0.5


@dataclass(frozen=True)
class IkResult:
    status: IkStatus
    solution: JointState
    iterations: int
    position_error: float
    orientation_error: float

    @property
    def success(self) -> bool:
        return self.status is IkStatus.SUCCESS


def _fk_arrays(comp: _CompiledChain, qvec: np.ndarray):
    """Walk the chain path; returns tip position/rotation and per-path-joint
    world origins and axes (needed for Jacobian columns).

    Per-joint rotations are built in one batched Rodrigues evaluation and
    pre-multiplied by the static origin rotations, so the sequential walk is
    two small matrix products per joint; world axes are batched afterwards.
    """
    n = qvec.shape[0]
    c = np.cos(qvec)
    s = np.sin(qvec)
    locals_ = c[:, None, None] * comp.eye_stack
    locals_ += s[:, None, None] * comp.skew
    locals_ += (1.0 - c)[:, None, None] * comp.outer
    steps = comp.static_rot @ locals_

    rot = np.eye(3)
    pos = np.zeros(3)
    joint_pos = np.empty((n, 3))
    prefix_rot = np.empty((n, 3, 3))
    for i in range(n):
        pos = pos + rot @ comp.static_trans[i]
        joint_pos[i] = pos
        prefix_rot[i] = rot
        rot = rot @ steps[i]
    pos = pos + rot @ comp.tip_trans
    rot = rot @ comp.tip_rot
    # World axis of joint i uses the rotation accumulated before its spin.
    joint_axis = np.einsum("nij,nj->ni", prefix_rot, comp.rotated_axes)
    return pos, rot, joint_pos, joint_axis


def forward_kinematics(model: RobotModel, q: JointState, chain: str) -> Pose:
    """Pose of the chain tip (palm frame for arms) in the robot base frame."""
    comp = model.compiled(chain)
    pos, rot, _, _ = _fk_arrays(comp, comp.extract(q))
    return Pose.from_matrix(rot, pos)


def jacobian(model: RobotModel, q: JointState, chain: str) -> np.ndarray:
    """Geometric Jacobian of the chain tip, 6 x n (linear rows first).

    Columns correspond to the chain's joints in declared order; path joints
    outside the chain contribute no column.
    """
    comp = model.compiled(chain)
    tip, _, joint_pos, joint_axis = _fk_arrays(comp, comp.extract(q))
    return _jacobian_columns(comp, tip, joint_pos, joint_axis)


def _jacobian_columns(comp, tip, joint_pos, joint_axis) -> np.ndarray:
    cols = comp.column_index
    axes = joint_axis[cols]
    lever = tip[None, :] - joint_pos[cols]
    jac = np.empty((6, len(cols)))
    jac[:3] = np.cross(axes, lever).T
    jac[3:] = axes.T
    return jac


def solve_ik(
    model: RobotModel,
    chain: str,
    target: Pose,
    seed: JointState,
    params: IkParams = IkParams(),
    freeze_torso: bool = False,
) -> IkResult:
    """Damped-least-squares IK from ``seed`` toward ``target``.

    Update rule per iteration:
        q += step_scale * J^T (J J^T + damping^2 I)^-1 * error
    with the joint vector clamped to limits after every step. Columns of
    joints sitting at a limit and being pushed further out are dropped and
    the step re-solved once, so clamping does not silently discard the
    update (weighted-clamping DLS). No null-space objective is applied; the
    seed decides which solution branch is found.

    Targets whose position lies beyond the summed link lengths of the chain
    are rejected as UNREACHABLE without entering the iteration loop.
    """
    comp = model.compiled(chain)
    qvec = comp.extract(seed)
    lo_path = np.array([model.joints[n].limits[0] for n in comp.path_names])
    hi_path = np.array([model.joints[n].limits[1] for n in comp.path_names])
    if np.any(qvec < lo_path - 1e-12) or np.any(qvec > hi_path + 1e-12):
        raise ValueError("IK seed lies outside joint limits")

    if float(np.linalg.norm(target.position)) > comp.max_reach:
        return IkResult(
            status=IkStatus.UNREACHABLE,
            solution=seed,
            iterations=0,
            position_error=float("inf"),
            orientation_error=float("inf"),
        )

    cols = comp.column_index
    if freeze_torso:
        torso = set(model.chains["torso"].joints)
        active = np.array(
            [i for i, name in enumerate(comp.chain.joints) if name not in torso],
            dtype=int,
        )
    else:
        active = np.arange(len(cols))
    lo = comp.lo[active]
    hi = comp.hi[active]
    path_idx = cols[active]

    target_pos = target.position
    target_rot = rot_from_quat(target.orientation)
    damping_sq = params.damping * params.damping
    eye6 = np.eye(6)

    best_q = qvec.copy()
    best_err = (float("inf"), float("inf"))
    iterations = 0
    for iterations in range(params.max_iterations + 1):
        tip, rot, joint_pos, joint_axis = _fk_arrays(comp, qvec)
        pos_err_vec = target_pos - tip
        rot_err_vec = orientation_error(target_rot, rot)
        pos_err = float(np.linalg.norm(pos_err_vec))
        rot_err = float(np.linalg.norm(rot_err_vec))
        if pos_err + rot_err < best_err[0] + best_err[1]:
            best_err = (pos_err, rot_err)
            best_q = qvec.copy()
        if pos_err <= params.position_tolerance and rot_err <= params.orientation_tolerance:
            return IkResult(
                status=IkStatus.SUCCESS,
                solution=seed.with_updates(
                    {name: float(qvec[i]) for name, i in zip(comp.chain.joints, cols)}
                ),
                iterations=iterations,
                position_error=pos_err,
                orientation_error=rot_err,
            )
        if iterations == params.max_iterations:
            break
        if pos_err > _POS_ERROR_CLAMP:
            pos_err_vec = pos_err_vec * (_POS_ERROR_CLAMP / pos_err)
        if rot_err > _ROT_ERROR_CLAMP:
            rot_err_vec = rot_err_vec * (_ROT_ERROR_CLAMP / rot_err)
        jac_full = _jacobian_columns(comp, tip, joint_pos, joint_axis)
        jac = jac_full[:, active]
        err = np.concatenate([pos_err_vec, rot_err_vec])
        q_active = qvec[path_idx]
        step = jac.T @ np.linalg.solve(jac @ jac.T + damping_sq * eye6, err)
        saturated = ((q_active <= lo + 1e-9) & (step < 0.0)) | (
            (q_active >= hi - 1e-9) & (step > 0.0)
        )
        if saturated.any() and not saturated.all():
            masked = jac.copy()
            masked[:, saturated] = 0.0
            step = masked.T @ np.linalg.solve(
                masked @ masked.T + damping_sq * eye6, err
            )
        qvec = qvec.copy()
        qvec[path_idx] = np.clip(q_active + params.step_scale * step, lo, hi)

    return IkResult(
        status=IkStatus.NO_CONVERGENCE,
        solution=seed.with_updates(
            {name: float(best_q[i]) for name, i in zip(comp.chain.joints, cols)}
        ),
        iterations=iterations,
        position_error=best_err[0],
        orientation_error=best_err[1],
    )
