"""Deterministic fixed-tick simulation engine.

All operations are functional: they clone the incoming WorldState, mutate
the clone, and return (new_state, events). Command handlers raise
CommandError subclasses; apply_command_reported converts those into
COMMAND_REJECTED events for callers that must never crash (server, script
runner). Ticks are total — they never raise.

Mode graph:
    idle -> planning -> awaiting_approval -> {walking, manipulating, idle}
    idle -> walking (joystick)            walking -> idle
    idle -> manipulating (mimic arm)      manipulating -> idle
"""

from __future__ import annotations

import math

from ..errors import (
    CommandError,
    IkFailed,
    IndexOutOfRange,
    InvalidStart,
    NoPath,
    PlanLocked,
    UnknownJoint,
    UnknownPlan,
    WrongMode,
)
from ..footsteps import (
    Footstep,
    Goal2D,
    PlanStatus,
    Side,
    StancePose,
    edit_footstep,
    plan_footsteps,
    snap_footstep,
    validate_plan,
)
from ..footsteps.planner import PlannerConfig, default_templates
from ..geometry import Pose, wrap_angle, yaw_from_quat
from ..kinematics import IkParams, JointState, forward_kinematics, solve_ik
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
    command_to_dict,
)
from .events import Event, EventKind
from .world import (
    AVOID_TASK,
    GraspHold,
    JoystickState,
    Mode,
    ObjectKind,
    PICKUP_TASK,
    SwingState,
    TaskStatus,
    VALVE_TASK,
    WALK_TASK,
    WorldObject,
    WorldState,
    base_pose_from_stance,
)


class PlanInvalid(CommandError):
    """Approval refused: the plan currently carries violations."""

    code = "PLAN_INVALID"


_JOYSTICK_DEADBAND = 0.02


def _emit(state: WorldState, events: list[Event], kind: EventKind, payload: dict,
          meta: dict | None = None) -> None:
    state.event_seq += 1
    body = dict(payload)
    if meta:
        body["cmd"] = dict(meta)
    events.append(Event(tick=state.tick_count, seq=state.event_seq, kind=kind, payload=body))


def palm_pose_world(state: WorldState, side: Side) -> Pose:
    chain = state.model.end_effectors[side.value]
    local = forward_kinematics(state.model, JointState(state.robot.joints), chain)
    return state.robot.base.compose(local)


def _arm_joint_names(state: WorldState, side: Side) -> tuple[str, ...]:
    return state.model.chains[state.model.end_effectors[side.value]].joints


def _set_setpoint(state: WorldState, joint: str, value: float) -> None:
    spec = state.model.joints.get(joint)
    if spec is None:
        raise UnknownJoint(f"no joint named {joint!r}")
    lo, hi = spec.limits
    state.joint_setpoints[joint] = min(max(value, lo), hi)


def _next_plan_id(state: WorldState) -> str:
    state.plan_counter += 1
    return f"plan-{state.plan_counter}"


def _next_posture_id(state: WorldState) -> str:
    state.posture_counter += 1
    return f"posture-{state.posture_counter}"


# --- command handling -------------------------------------------------------

def apply_command(
    state: WorldState, cmd: Command, meta: dict | None = None
) -> tuple[WorldState, list[Event]]:
    """Apply one operator command. Raises CommandError subclasses on
    rejection; the input state is never mutated either way."""
    new = state.clone()
    events: list[Event] = []
    robot = new.robot

    if isinstance(cmd, SetNavGoal):
        if robot.mode is not Mode.IDLE:
            raise WrongMode(f"cannot set a navigation goal while {robot.mode.value}")
        robot.mode = Mode.PLANNING
        plan_id = _next_plan_id(new)
        try:
            plan = plan_footsteps(
                new.grid,
                robot.stance,
                Goal2D(cmd.x, cmd.y, cmd.yaw),
                new.constraints,
                PlannerConfig(),
                plan_id=plan_id,
            )
        except (NoPath, InvalidStart) as exc:
            robot.mode = Mode.IDLE
            wrapped = CommandError(str(exc))
            wrapped.code = "NO_PATH" if isinstance(exc, NoPath) else "INVALID_START"
            raise wrapped from exc
        new.plans[plan.id] = plan
        new.pending_id = plan.id
        robot.mode = Mode.AWAITING_APPROVAL
        _emit(new, events, EventKind.PLAN_PROPOSED,
              {"plan": plan.to_dict(), "source": cmd.source}, meta)
        return new, events

    if isinstance(cmd, Joystick):
        if robot.mode not in (Mode.IDLE, Mode.WALKING):
            raise WrongMode(f"joystick not accepted while {robot.mode.value}")
        if robot.mode is Mode.WALKING and not (
            new.swing and new.swing.plan_id.startswith("joy-")
        ):
            raise WrongMode("joystick not accepted during plan execution")
        p = new.params
        new.joystick = JoystickState(
            vx=max(-p.joystick_max_speed, min(p.joystick_max_speed, cmd.vx)),
            vy=max(-p.joystick_max_speed, min(p.joystick_max_speed, cmd.vy)),
            wz=max(-p.joystick_max_yaw_rate, min(p.joystick_max_yaw_rate, cmd.wz)),
            last_refresh_tick=new.tick_count,
        )
        return new, events

    if isinstance(cmd, EditFootstep):
        plan = new.plans.get(cmd.plan_id)
        if plan is None:
            raise UnknownPlan(f"no plan {cmd.plan_id!r}")
        try:
            edited = edit_footstep(
                new.grid, plan, cmd.index,
                Goal2D(cmd.x, cmd.y, cmd.yaw), new.constraints,
            )
        except (PlanLocked, IndexOutOfRange) as exc:
            wrapped = CommandError(str(exc))
            wrapped.code = type(exc).__name__.upper()
            raise wrapped from exc
        new.plans[edited.id] = edited
        _emit(new, events, EventKind.PLAN_STATUS_CHANGED,
              {"plan": edited.to_dict(), "edited_index": cmd.index}, meta)
        return new, events

    if isinstance(cmd, ApprovePlan):
        if cmd.plan_id in new.postures:
            if robot.mode is not Mode.AWAITING_APPROVAL or new.pending_id != cmd.plan_id:
                raise WrongMode("no such posture awaiting approval")
            posture = new.postures.pop(cmd.plan_id)
            new.pending_id = None
            for joint, value in posture.items():
                _set_setpoint(new, joint, value)
            new.active_posture_id = cmd.plan_id
            robot.mode = Mode.MANIPULATING
            _emit(new, events, EventKind.PLAN_STATUS_CHANGED,
                  {"id": cmd.plan_id, "kind": "posture", "status": "executing"}, meta)
            return new, events
        plan = new.plans.get(cmd.plan_id)
        if plan is None:
            raise UnknownPlan(f"no plan {cmd.plan_id!r}")
        if robot.mode is not Mode.AWAITING_APPROVAL or new.pending_id != cmd.plan_id:
            raise WrongMode("plan is not awaiting approval")
        report = validate_plan(new.grid, plan, robot.stance, new.constraints)
        if report:
            raise PlanInvalid(
                f"plan {plan.id} has {len(report)} violation(s); fix or reject it"
            )
        plan = plan.with_status(PlanStatus.APPROVED).with_status(PlanStatus.EXECUTING)
        new.plans[plan.id] = plan
        new.pending_id = None
        robot.active_plan_id = plan.id
        robot.step_index = 0
        robot.step_progress = 0.0
        robot.mode = Mode.WALKING
        _emit(new, events, EventKind.PLAN_STATUS_CHANGED,
              {"id": plan.id, "status": plan.status.value}, meta)
        if not plan.steps:
            _finish_plan(new, events, meta)
        return new, events

    if isinstance(cmd, RejectPlan):
        if cmd.plan_id in new.postures:
            if new.pending_id != cmd.plan_id:
                raise WrongMode("posture is not awaiting approval")
            del new.postures[cmd.plan_id]
            new.pending_id = None
            robot.mode = Mode.IDLE
            _emit(new, events, EventKind.PLAN_STATUS_CHANGED,
                  {"id": cmd.plan_id, "kind": "posture", "status": "rejected"}, meta)
            return new, events
        plan = new.plans.get(cmd.plan_id)
        if plan is None:
            raise UnknownPlan(f"no plan {cmd.plan_id!r}")
        if robot.mode is not Mode.AWAITING_APPROVAL or new.pending_id != cmd.plan_id:
            raise WrongMode("plan is not awaiting approval")
        plan = plan.with_status(PlanStatus.REJECTED)
        new.plans[plan.id] = plan
        new.pending_id = None
        robot.mode = Mode.IDLE
        _emit(new, events, EventKind.PLAN_STATUS_CHANGED,
              {"id": plan.id, "status": plan.status.value}, meta)
        return new, events

    if isinstance(cmd, ArmTarget):
        if cmd.mode == "mimic" and robot.mode not in (Mode.IDLE, Mode.MANIPULATING):
            raise WrongMode(f"arm target not accepted while {robot.mode.value}")
        if cmd.mode == "grab_marker" and robot.mode is not Mode.IDLE:
            raise WrongMode("grab-marker targets need an idle robot")
        chain = new.model.end_effectors[cmd.side.value]
        target_local = robot.base.inverse().compose(cmd.pose)
        result = solve_ik(
            new.model,
            chain,
            target_local,
            JointState(robot.joints),
            IkParams(),
            freeze_torso=True,
        )
        if not result.success:
            raise IkFailed(
                f"{cmd.side.value} arm cannot reach the target "
                f"(status {result.status.value}, pos err {result.position_error:.4f})"
            )
        solution = {
            name: result.solution.get(name) for name in _arm_joint_names(new, cmd.side)
        }
        if cmd.mode == "mimic":
            for joint, value in solution.items():
                _set_setpoint(new, joint, value)
            robot.arm_targets[cmd.side.value] = cmd.pose.to_dict()
            robot.mode = Mode.MANIPULATING
            return new, events
        posture_id = _next_posture_id(new)
        new.postures[posture_id] = solution
        new.pending_id = posture_id
        robot.mode = Mode.AWAITING_APPROVAL
        _emit(new, events, EventKind.PLAN_PROPOSED,
              {"id": posture_id, "kind": "posture", "side": cmd.side.value,
               "joints": solution}, meta)
        return new, events

    if isinstance(cmd, JointSlider):
        _set_setpoint(new, cmd.joint, cmd.position)
        return new, events

    if isinstance(cmd, JointNudge):
        if cmd.joint not in new.model.joints:
            raise UnknownJoint(f"no joint named {cmd.joint!r}")
        current = new.joint_setpoints.get(cmd.joint, robot.joints[cmd.joint])
        _set_setpoint(new, cmd.joint, current + cmd.delta)
        return new, events

    if isinstance(cmd, Fingers):
        for joint, value in zip(new.model.finger_joints(cmd.side.value), cmd.closure):
            _set_setpoint(new, joint, min(max(value, 0.0), 1.0))
        return new, events

    if isinstance(cmd, NeckTorso):
        allowed = set(new.model.chains["neck"].joints) | set(
            new.model.chains["torso"].joints
        )
        for joint in cmd.positions:
            if joint not in allowed:
                raise UnknownJoint(f"{joint!r} is not a neck or torso joint")
        for joint, value in cmd.positions.items():
            _set_setpoint(new, joint, value)
        return new, events

    if isinstance(cmd, AbortWalk):
        _abort_walk(new, events, meta)
        new.joystick = None
        return new, events

    raise CommandError(f"unhandled command type {type(cmd).__name__}")


def apply_command_reported(
    state: WorldState, cmd: Command, meta: dict | None = None
) -> tuple[WorldState, list[Event]]:
    """Like apply_command, but rejections become COMMAND_REJECTED events on
    an otherwise unchanged state."""
    try:
        return apply_command(state, cmd, meta)
    except CommandError as exc:
        new = state.clone()
        events: list[Event] = []
        _emit(new, events, EventKind.COMMAND_REJECTED,
              {"command": command_to_dict(cmd), "code": exc.code, "reason": str(exc)},
              meta)
        return new, events


# --- internal transitions ---------------------------------------------------

def _abort_walk(state: WorldState, events: list[Event], meta: dict | None) -> None:
    robot = state.robot
    if robot.mode is not Mode.WALKING:
        return
    plan_id = robot.active_plan_id
    if plan_id and plan_id in state.plans:
        plan = state.plans[plan_id].with_status(PlanStatus.ABORTED)
        state.plans[plan_id] = plan
        _emit(state, events, EventKind.PLAN_STATUS_CHANGED,
              {"id": plan_id, "status": PlanStatus.ABORTED.value}, meta)
    if state.swing is not None:
        _resettle_swing_foot(state)
    state.swing = None
    robot.active_plan_id = None
    robot.step_progress = 0.0
    robot.mode = Mode.IDLE


def _resettle_swing_foot(state: WorldState) -> None:
    """Drop a mid-swing foot onto the terrain where it currently hovers."""
    swing = state.swing
    stance = state.robot.stance
    foot = stance.foot(swing.side)
    in_bounds, z, _, _ = state.grid.probe_footprint(
        foot.x, foot.y, foot.yaw,
        state.constraints.foot_length, state.constraints.foot_width,
        state.constraints.max_height_delta,
    )
    settled = Footstep(side=foot.side, x=foot.x, y=foot.y, yaw=foot.yaw,
                       z=z if in_bounds else foot.z)
    state.robot.stance = _stance_with(stance, settled)
    state.robot.base = base_pose_from_stance(state.robot.stance, state.params)


def _stance_with(stance: StancePose, foot: Footstep) -> StancePose:
    if foot.side is Side.LEFT:
        return StancePose(left=foot, right=stance.right)
    return StancePose(left=stance.left, right=foot)


def _begin_step(state: WorldState, events: list[Event], plan_id: str,
                index: int, target: Footstep) -> None:
    foot = state.robot.stance.foot(target.side)
    state.swing = SwingState(
        plan_id=plan_id,
        step_index=index,
        side=target.side,
        from_x=foot.x, from_y=foot.y, from_yaw=foot.yaw, from_z=foot.z,
        target=target,
    )
    state.robot.step_index = index
    state.robot.step_progress = 0.0
    _emit(state, events, EventKind.STEP_STARTED,
          {"plan_id": plan_id, "index": index, "step": target.to_dict()})


def _finish_plan(state: WorldState, events: list[Event], meta: dict | None = None) -> None:
    plan_id = state.robot.active_plan_id
    if plan_id and plan_id in state.plans:
        plan = state.plans[plan_id].with_status(PlanStatus.DONE)
        state.plans[plan_id] = plan
        state.any_plan_done = True
        _emit(state, events, EventKind.PLAN_STATUS_CHANGED,
              {"id": plan_id, "status": PlanStatus.DONE.value}, meta)
    state.robot.active_plan_id = None
    state.robot.step_progress = 0.0
    state.swing = None
    state.robot.mode = Mode.IDLE


def _joystick_fresh(state: WorldState) -> bool:
    js = state.joystick
    if js is None:
        return False
    age = (state.tick_count - js.last_refresh_tick) * state.params.dt
    if age > state.params.deadman_timeout:
        return False
    return (
        abs(js.vx) > _JOYSTICK_DEADBAND
        or abs(js.vy) > _JOYSTICK_DEADBAND
        or abs(js.wz) > _JOYSTICK_DEADBAND
    )


def _synthesize_joystick_step(state: WorldState, events: list[Event]) -> bool:
    """Pick the transition template closest to the commanded velocity and
    start it as a single-step auto-approved plan. Shares the planner's
    template set so the same feasibility rules apply."""
    js = state.joystick
    c = state.constraints
    p = state.params
    dx_des = js.vx * p.step_duration
    dyaw_des = js.wz * p.step_duration
    sep_des = c.nominal_separation
    if abs(js.vy) > _JOYSTICK_DEADBAND:
        # Crab-walk by widening toward the commanded side.
        sep_des = c.max_lateral - 0.02 if js.vy != 0 else sep_des

    templates = sorted(
        default_templates(c),
        key=lambda t: (
            abs(t.forward - dx_des)
            + abs(t.turn - dyaw_des)
            + 0.3 * abs(t.separation - sep_des)
        ),
    )
    stance = state.robot.stance
    # Crab-walking leads with the foot on the commanded side; otherwise
    # alternate from whichever foot is further back along the heading.
    if abs(js.vy) > _JOYSTICK_DEADBAND and abs(js.vx) <= _JOYSTICK_DEADBAND:
        lead = Side.LEFT if js.vy > 0 else Side.RIGHT
        support = stance.foot(lead.opposite)
    else:
        heading = yaw_from_quat(state.robot.base.orientation)
        along_left = stance.left.x * math.cos(heading) + stance.left.y * math.sin(heading)
        along_right = stance.right.x * math.cos(heading) + stance.right.y * math.sin(heading)
        support = stance.right if along_left <= along_right else stance.left
    for template in templates[:4]:
        candidate = template.place(support)
        snapped_probe = state.grid.probe_footprint(
            candidate.x, candidate.y, candidate.yaw,
            c.foot_length, c.foot_width, c.max_height_delta,
        )
        in_bounds, z, no_step_hit, spread = snapped_probe
        if not in_bounds or no_step_hit or spread:
            continue
        target = Footstep(side=candidate.side, x=candidate.x, y=candidate.y,
                          yaw=candidate.yaw, z=z)
        state.joystick_counter += 1
        plan_id = f"joy-{state.joystick_counter}"
        state.robot.active_plan_id = plan_id
        state.robot.mode = Mode.WALKING
        _begin_step(state, events, plan_id, 0, target)
        return True
    return False


def _progress_swing(state: WorldState, events: list[Event]) -> None:
    swing = state.swing
    p = state.params
    swing.progress = min(1.0, swing.progress + p.dt / p.step_duration)
    state.robot.step_progress = swing.progress
    target = swing.target
    t = swing.progress
    if t >= 1.0:
        foot = target
    else:
        foot = Footstep(
            side=target.side,
            x=swing.from_x + (target.x - swing.from_x) * t,
            y=swing.from_y + (target.y - swing.from_y) * t,
            yaw=swing.from_yaw + wrap_angle(target.yaw - swing.from_yaw) * t,
            z=swing.from_z + (target.z - swing.from_z) * t,
        )
    state.robot.stance = _stance_with(state.robot.stance, foot)
    state.robot.base = base_pose_from_stance(state.robot.stance, p)
    if t < 1.0:
        return

    _emit(state, events, EventKind.STEP_COMPLETED,
          {"plan_id": swing.plan_id, "index": swing.step_index,
           "step": target.to_dict()})
    if state.protected_cells is not None and state.tasks.avoid_enabled:
        ixs, iys = state.grid.covered_cells(
            target.x, target.y, target.yaw,
            state.constraints.foot_length, state.constraints.foot_width,
        )
        if len(ixs) and bool(state.protected_cells[iys, ixs].any()):
            state.protected_hit = True
    state.swing = None
    state.robot.step_progress = 0.0

    plan_id = state.robot.active_plan_id
    if plan_id and plan_id.startswith("joy-"):
        # Joystick micro-plans are one step long; the deadman/tick loop
        # decides whether another one starts.
        state.robot.active_plan_id = None
        if not _joystick_fresh(state):
            state.robot.mode = Mode.IDLE
            state.joystick = None
        return
    plan = state.plans.get(plan_id) if plan_id else None
    if plan is None:
        state.robot.mode = Mode.IDLE
        return
    next_index = swing.step_index + 1
    if next_index < len(plan.steps):
        _begin_step(state, events, plan_id, next_index, plan.steps[next_index])
    else:
        _finish_plan(state, events)


def _move_joints(state: WorldState) -> bool:
    """Advance joints toward setpoints under velocity limits; returns
    whether anything moved."""
    moved = False
    dt = state.params.dt
    joints = state.robot.joints
    for name, setpoint in state.joint_setpoints.items():
        current = joints[name]
        if setpoint == current:
            continue
        spec = state.model.joints[name]
        max_delta = spec.max_velocity * dt
        delta = setpoint - current
        if delta > max_delta:
            delta = max_delta
        elif delta < -max_delta:
            delta = -max_delta
        lo, hi = spec.limits
        joints[name] = min(max(current + delta, lo), hi)
        if joints[name] != current:
            moved = True
    return moved


def _setpoints_reached(state: WorldState) -> bool:
    eps = state.params.setpoint_epsilon
    joints = state.robot.joints
    return all(
        abs(joints[name] - sp) <= eps for name, sp in state.joint_setpoints.items()
    )


def _mean_closure(state: WorldState, side: Side) -> float:
    names = state.model.finger_joints(side.value)
    return sum(state.robot.joints[n] for n in names) / len(names)


def _grasp_point(obj: WorldObject):
    if obj.kind is ObjectKind.GRASPABLE_BOX:
        return obj.pose.position
    if obj.kind is ObjectKind.VALVE:
        local = [
            obj.handle_radius * math.cos(obj.angle),
            obj.handle_radius * math.sin(obj.angle),
            0.0,
        ]
        return obj.pose.transform_point(local)
    return None


def check_grasp(state: WorldState, side: Side) -> tuple[WorldState, list[Event]]:
    """Attach/detach decision for one hand (also runs inside every tick)."""
    new = state.clone()
    events: list[Event] = []
    _update_grasp_side(new, events, Side(side))
    return new, events


def _update_grasp_side(state: WorldState, events: list[Event], side: Side) -> None:
    closure = _mean_closure(state, side)
    hold = state.holds.get(side.value)
    if hold is not None:
        if closure < state.params.grasp_release_closure:
            obj = state.object_by_id(hold.object_id)
            if obj.kind is ObjectKind.GRASPABLE_BOX:
                obj.grasped_by = None
            payload = {"side": side.value, "object": hold.object_id}
            if obj.kind is ObjectKind.VALVE and hold.turned != 0.0:
                _emit(state, events, EventKind.VALVE_TURNED,
                      {"object": obj.id, "turned": hold.turned, "angle": obj.angle})
            del state.holds[side.value]
            _emit(state, events, EventKind.GRASP_RELEASED, payload)
        return
    if closure < state.params.grasp_attach_closure:
        return
    palm = palm_pose_world(state, side)
    best = None
    for obj in state.objects:
        point = _grasp_point(obj)
        if point is None:
            continue
        if obj.kind is ObjectKind.GRASPABLE_BOX and obj.grasped_by is not None:
            continue
        distance = float(
            math.dist(tuple(palm.position), tuple(point))
        )
        if distance <= state.params.grasp_attach_distance and (
            best is None or distance < best[0]
        ):
            best = (distance, obj)
    if best is None:
        return
    _, obj = best
    if obj.kind is ObjectKind.GRASPABLE_BOX:
        obj.grasped_by = side
        offset = palm.inverse().compose(obj.pose)
        state.holds[side.value] = GraspHold(object_id=obj.id, offset=offset)
    else:
        wrist = f"{'l' if side is Side.LEFT else 'r'}_wrist_roll"
        state.holds[side.value] = GraspHold(
            object_id=obj.id, wrist_ref=state.robot.joints[wrist]
        )
    _emit(state, events, EventKind.GRASP_ATTACHED,
          {"side": side.value, "object": obj.id,
           "distance": best[0], "closure": closure})


def _update_held_objects(state: WorldState, events: list[Event]) -> None:
    for side_value, hold in list(state.holds.items()):
        side = Side(side_value)
        obj = state.object_by_id(hold.object_id)
        if obj.kind is ObjectKind.GRASPABLE_BOX:
            palm = palm_pose_world(state, side)
            obj.pose = palm.compose(hold.offset)
        elif obj.kind is ObjectKind.VALVE:
            wrist = f"{'l' if side is Side.LEFT else 'r'}_wrist_roll"
            now = state.robot.joints[wrist]
            delta = now - hold.wrist_ref
            if delta != 0.0:
                before = obj.angle
                obj.angle += delta
                hold.turned += delta
                hold.wrist_ref = now
                target = state.tasks.valve_target_angle
                if (
                    state.tasks.valve_object == obj.id
                    and before < target <= obj.angle
                ):
                    _emit(state, events, EventKind.VALVE_TURNED,
                          {"object": obj.id, "angle": obj.angle, "target": target})


def task_status(state: WorldState) -> dict[str, TaskStatus]:
    """Current status of every task the scenario declares (latched)."""
    tasks = state.tasks
    flags = dict(state.task_flags)

    if tasks.walk_goal is not None and flags.get(WALK_TASK) is not TaskStatus.COMPLETE:
        base = state.robot.base
        yaw = yaw_from_quat(base.orientation)
        goal = tasks.walk_goal
        if (
            math.hypot(base.position[0] - goal["x"], base.position[1] - goal["y"])
            <= tasks.walk_position_tolerance
            and abs(wrap_angle(yaw - goal["yaw"])) <= tasks.walk_yaw_tolerance
        ):
            flags[WALK_TASK] = TaskStatus.COMPLETE

    if tasks.avoid_enabled:
        if state.protected_hit:
            flags[AVOID_TASK] = TaskStatus.VIOLATED
        elif state.any_plan_done and flags.get(AVOID_TASK) is not TaskStatus.VIOLATED:
            flags[AVOID_TASK] = TaskStatus.COMPLETE

    if (
        tasks.pickup_object is not None
        and flags.get(PICKUP_TASK) is not TaskStatus.COMPLETE
    ):
        box = state.object_by_id(tasks.pickup_object)
        if box.grasped_by is not None:
            reference = (
                float(state.object_by_id(tasks.pickup_table).pose.position[2])
                if tasks.pickup_table
                else 0.0
            )
            if float(box.pose.position[2]) >= reference + tasks.pickup_lift_height:
                flags[PICKUP_TASK] = TaskStatus.COMPLETE

    if (
        tasks.valve_object is not None
        and flags.get(VALVE_TASK) is not TaskStatus.COMPLETE
    ):
        valve = state.object_by_id(tasks.valve_object)
        if valve.angle >= tasks.valve_target_angle:
            flags[VALVE_TASK] = TaskStatus.COMPLETE

    return flags


def tick(state: WorldState, dt: float | None = None) -> tuple[WorldState, list[Event]]:
    """Advance the world one fixed tick. Total: never raises."""
    new = state.clone()
    if dt is not None and abs(dt - new.params.dt) > 1e-12:
        raise ValueError(f"tick dt must equal the configured {new.params.dt}")
    events: list[Event] = []
    new.tick_count += 1
    robot = new.robot

    # Kick off the next plan step, or synthesize a joystick step.
    if new.swing is None and robot.mode is Mode.WALKING and robot.active_plan_id:
        plan = new.plans.get(robot.active_plan_id)
        if plan is not None and robot.step_index < len(plan.steps):
            _begin_step(new, events, plan.id, robot.step_index,
                        plan.steps[robot.step_index])
    if new.swing is None and robot.mode in (Mode.IDLE, Mode.WALKING):
        if _joystick_fresh(new):
            _synthesize_joystick_step(new, events)
        elif new.joystick is not None and robot.mode is Mode.IDLE:
            new.joystick = None

    walking = new.swing is not None
    if new.swing is not None:
        _progress_swing(new, events)

    joints_moved = _move_joints(new)
    if robot.mode is Mode.MANIPULATING and _setpoints_reached(new):
        robot.mode = Mode.IDLE
        if new.active_posture_id:
            _emit(new, events, EventKind.PLAN_STATUS_CHANGED,
                  {"id": new.active_posture_id, "kind": "posture", "status": "done"})
            new.active_posture_id = None

    for side in (Side.LEFT, Side.RIGHT):
        _update_grasp_side(new, events, side)
    _update_held_objects(new, events)

    rate = new.params.battery_idle_rate
    if walking or joints_moved:
        rate += new.params.battery_motion_rate
    new.battery = max(0.0, new.battery - rate * new.params.dt)
    if not new.battery_low_sent and new.battery < new.params.battery_low_threshold:
        new.battery_low_sent = True
        _emit(new, events, EventKind.BATTERY_LOW, {"battery": new.battery})

    fresh = task_status(new)
    for name, status in fresh.items():
        if new.task_flags.get(name) != status:
            _emit(new, events, EventKind.TASK_COMPLETED,
                  {"task": name, "status": status.value})
    new.task_flags = fresh

    return new, events


def snapshot(state: WorldState) -> dict:
    """Read-only serializable view of everything the console renders."""
    robot = state.robot
    plan = state.plans.get(robot.active_plan_id) if robot.active_plan_id else None
    pending = None
    if state.pending_id:
        if state.pending_id in state.postures:
            pending = {"id": state.pending_id, "kind": "posture"}
        elif state.pending_id in state.plans:
            pending = {"id": state.pending_id, "kind": "plan"}
    return {
        "tick": state.tick_count,
        "time": state.sim_time(),
        "mode": robot.mode.value,
        "battery": state.battery,
        "base": robot.base.to_dict(),
        "stance": robot.stance.to_dict(),
        "joints": dict(robot.joints),
        "active_plan": (
            {
                "id": plan.id,
                "status": plan.status.value,
                "current_step": robot.step_index,
                "total_steps": len(plan.steps),
            }
            if plan is not None
            else (
                {"id": robot.active_plan_id, "status": "executing",
                 "current_step": robot.step_index, "total_steps": 1}
                if robot.active_plan_id
                else None
            )
        ),
        "pending": pending,
        "objects": [obj.to_dict() for obj in state.objects],
        "tasks": {name: status.value for name, status in state.task_flags.items()},
        "last_event_seq": state.event_seq,
    }
