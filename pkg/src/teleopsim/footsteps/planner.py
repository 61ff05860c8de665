"""A* footstep search over a height map.

State = the full stance (foot just placed + foot still planted); the next
step always relocates the planted-side foot relative to the one just
placed, so transitions are Markov in the stance. Expansion uses a fixed
template set expressed in the support foot frame; every candidate must
snap onto valid terrain and satisfy the step feasibility bounds.

Cost per step is 1 + path_weight * (stance midpoint travel). The heuristic
combines three admissible lower bounds computed from the actual template
set: remaining steps by distance (midpoint advance per step is bounded by
the template geometry), remaining steps by heading change (one step turns
the stance mean yaw by at most half a template turn), and the weighted
remaining midpoint travel. Duplicate stances are merged on a quantized
grid; determinism comes from lexicographic (f, g, insertion) ordering.
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import json
import math
from dataclasses import dataclass

from ..errors import InvalidStart, NoPath, OutOfBounds
from ..geometry import wrap_angle
from .heightmap import HeightMap
from .plan import (
    Footstep,
    FootstepPlan,
    Goal2D,
    PlanStatus,
    Side,
    StancePose,
    StepConstraints,
    feet_overlap,
    snap_footstep,
    validate_transition,
)


@dataclass(frozen=True)
class TransitionTemplate:
    """Swing-foot placement in the support foot frame.

    ``forward`` meters along the support heading, ``separation`` meters to
    the swing side, ``turn`` radians of relative yaw.
    """

    forward: float
    separation: float
    turn: float = 0.0

    def place(self, support: Footstep) -> Footstep:
        lateral = self.separation if support.side is Side.RIGHT else -self.separation
        cos, sin = math.cos(support.yaw), math.sin(support.yaw)
        return Footstep(
            side=support.side.opposite,
            x=support.x + cos * self.forward - sin * lateral,
            y=support.y + sin * self.forward + cos * lateral,
            yaw=wrap_angle(support.yaw + self.turn),
        )


def default_templates(c: StepConstraints) -> tuple[TransitionTemplate, ...]:
    """Fourteen moves: four forward lengths (straight and turning for the
    useful ones), two lateral adjustments, one backward step."""
    sep = c.nominal_separation
    turn = c.max_yaw_per_step
    return (
        TransitionTemplate(c.max_forward, sep),
        TransitionTemplate(0.30, sep),
        TransitionTemplate(0.30, sep, turn),
        TransitionTemplate(0.30, sep, -turn),
        TransitionTemplate(0.15, sep),
        TransitionTemplate(0.15, sep, turn),
        TransitionTemplate(0.15, sep, -turn),
        TransitionTemplate(0.0, sep),
        TransitionTemplate(0.0, sep, turn),
        TransitionTemplate(0.0, sep, -turn),
        TransitionTemplate(0.0, c.min_lateral_separation + 0.02),
        TransitionTemplate(0.0, c.max_lateral - 0.02),
        TransitionTemplate(-c.max_backward, sep),
        TransitionTemplate(0.15, c.max_lateral - 0.02),
    )


@dataclass(frozen=True)
class PlannerConfig:
    """Search knobs.

    heuristic_inflation > 1 trades strict cost optimality for speed
    (bounded suboptimality, standard weighted A*); the admissible base
    heuristic cannot price turning-while-walking tightly, and goals that
    need large heading changes blow past any interactive budget at
    inflation 1. Set it to 1.0 for exact-optimal search.
    """

    templates: tuple[TransitionTemplate, ...] | None = None
    path_weight: float = 0.5
    node_budget: int = 200_000
    position_quantum: float = 0.05
    yaw_quantum: float = 0.1
    heuristic_inflation: float = 2.0

    def resolve_templates(self, c: StepConstraints) -> tuple[TransitionTemplate, ...]:
        templates = self.templates if self.templates is not None else default_templates(c)
        probe = Footstep(side=Side.LEFT, x=0.0, y=0.0, yaw=0.0)
        for t in templates:
            if validate_transition(probe, t.place(probe), c):
                raise ValueError(f"template {t} violates the step constraints")
        return templates


def _scalar_place(x, y, yaw, side_left, template):
    """``TransitionTemplate.place`` on scalars (hot path)."""
    lateral = -template.separation if side_left else template.separation
    cos, sin = math.cos(yaw), math.sin(yaw)
    return (
        x + cos * template.forward - sin * lateral,
        y + sin * template.forward + cos * lateral,
        wrap_angle(yaw + template.turn),
    )


def _max_midpoint_advance(
    templates, start: StancePose
) -> float:
    """Largest stance-midpoint displacement one step can produce, over all
    consecutive template pairs plus the first step from the given stance."""
    worst = 0.0
    for t1, t2 in itertools.product(templates, repeat=2):
        sx, sy, syaw = _scalar_place(0.0, 0.0, 0.0, True, t1)  # support placed from P
        nx, ny, _ = _scalar_place(sx, sy, syaw, False, t2)  # next step back over P
        worst = max(worst, math.hypot(nx, ny) / 2.0)
    for support, other in (
        (start.right, start.left),
        (start.left, start.right),
    ):
        for t in templates:
            nx, ny, _ = _scalar_place(
                support.x, support.y, support.yaw, support.side is Side.LEFT, t
            )
            worst = max(worst, math.hypot(nx - other.x, ny - other.y) / 2.0)
    return worst * (1.0 + 1e-9)


def _mean_yaw(a: float, b: float) -> float:
    return math.atan2(
        math.sin(a) + math.sin(b), math.cos(a) + math.cos(b)
    )


# Multiplier on the turn-walk-turn guide term of the inflated heuristic; >1
# keeps f strictly decreasing along the dive so plateaus collapse.
_GUIDE_SCALE = 1.5


def deterministic_plan_id(start: StancePose, goal: Goal2D) -> str:
    blob = json.dumps(
        {"start": start.to_dict(), "goal": goal.to_dict()}, sort_keys=True
    ).encode()
    return "plan-" + hashlib.sha256(blob).hexdigest()[:10]


def plan_footsteps(
    grid: HeightMap,
    start: StancePose,
    goal: Goal2D | dict,
    c: StepConstraints = StepConstraints(),
    config: PlannerConfig = PlannerConfig(),
    plan_id: str | None = None,
) -> FootstepPlan:
    """Search for an alternating footstep sequence reaching the goal stance.

    The returned plan's steps are all snapped and valid, consecutive
    transitions satisfy the constraints, and the final stance midpoint lies
    within the goal tolerances. Raises InvalidStart when the start stance
    does not snap onto valid terrain and NoPath when the search exhausts
    its node budget or the reachable state space.
    """
    goal = Goal2D.from_dict(goal) if isinstance(goal, dict) else goal
    templates = config.resolve_templates(c)

    try:
        start_left = snap_footstep(grid, start.left, c)
        start_right = snap_footstep(grid, start.right, c)
    except OutOfBounds as exc:
        raise InvalidStart(f"start stance leaves the map: {exc}") from exc
    if not (start_left.valid and start_right.valid):
        raise InvalidStart("start stance rests on invalid terrain")
    if feet_overlap(start_left, start_right, c):
        raise InvalidStart("start stance feet overlap")
    start = StancePose(left=start_left, right=start_right)
    if plan_id is None:
        plan_id = deterministic_plan_id(start, goal)

    pos_tol = c.goal_position_tolerance
    yaw_tol = c.goal_yaw_tolerance
    gx, gy, gyaw = goal.x, goal.y, goal.yaw

    def goal_satisfied(mx, my, myaw, px, py, pyaw) -> bool:
        return (
            math.hypot((mx + px) / 2.0 - gx, (my + py) / 2.0 - gy) <= pos_tol
            and abs(wrap_angle(_mean_yaw(myaw, pyaw) - gyaw)) <= yaw_tol
        )

    if goal_satisfied(
        start.left.x, start.left.y, start.left.yaw,
        start.right.x, start.right.y, start.right.yaw,
    ):
        return FootstepPlan(
            id=plan_id, goal=goal, steps=(), status=PlanStatus.PROPOSED, start=start
        )

    mid_advance = _max_midpoint_advance(templates, start)
    yaw_advance = max(abs(t.turn) for t in templates) / 2.0 + 1e-12
    back_advance = max((-t.forward for t in templates), default=0.0)
    path_weight = config.path_weight
    inflation = config.heuristic_inflation

    def rigorous_bound(d_left: float, dyaw: float) -> float:
        # Valid lower bound: per step the midpoint advances at most
        # mid_advance and the stance mean yaw turns at most yaw_advance.
        return max(d_left / mid_advance, dyaw / yaw_advance) + path_weight * d_left

    def guide_estimate(mid_x, mid_y, yaw_mid, d_left, dyaw) -> float:
        # Turn-to-face / travel / turn-to-goal estimate. Not a lower bound;
        # used only to steer the inflated search, where sub-optimality is
        # already accepted.
        if d_left <= 0.0:
            steps = dyaw / yaw_advance
        else:
            bearing = math.atan2(gy - mid_y, gx - mid_x)
            fwd = (
                (abs(wrap_angle(bearing - yaw_mid)) + abs(wrap_angle(gyaw - bearing)))
                / yaw_advance
                + d_left / mid_advance
            )
            if back_advance > 0.0:
                rev = bearing + math.pi
                back = (
                    (abs(wrap_angle(rev - yaw_mid)) + abs(wrap_angle(gyaw - rev)))
                    / yaw_advance
                    + d_left / back_advance
                )
            else:
                back = math.inf
            steps = min(fwd, back)
        return steps + path_weight * d_left

    exact = inflation == 1.0

    def heuristic(mx, my, myaw, px, py, pyaw) -> float:
        mid_x = (mx + px) / 2.0
        mid_y = (my + py) / 2.0
        yaw_mid = _mean_yaw(myaw, pyaw)
        d_left = max(0.0, math.hypot(mid_x - gx, mid_y - gy) - pos_tol)
        dyaw = max(0.0, abs(wrap_angle(yaw_mid - gyaw)) - yaw_tol)
        lb = rigorous_bound(d_left, dyaw)
        if exact:
            return lb
        return max(
            inflation * lb,
            _GUIDE_SCALE * guide_estimate(mid_x, mid_y, yaw_mid, d_left, dyaw),
        )

    pos_q = config.position_quantum
    yaw_q = config.yaw_quantum
    foot_l = c.foot_length
    foot_w = c.foot_width
    dz = c.max_height_delta

    # Node: (mx, my, myaw, mz, m_side_left, px, py, pyaw, parent_id)
    nodes: list[tuple] = []
    open_heap: list[tuple[float, float, int, int]] = []
    best_g: dict = {}
    counter = itertools.count()

    def state_key(mx, my, myaw, side_left, px, py, pyaw):
        return (
            side_left,
            round(mx / pos_q),
            round(my / pos_q),
            round(myaw / yaw_q),
            round(px / pos_q),
            round(py / pos_q),
            round(pyaw / yaw_q),
        )

    def push(mx, my, myaw, mz, side_left, px, py, pyaw, parent, g):
        key = state_key(mx, my, myaw, side_left, px, py, pyaw)
        if best_g.get(key, math.inf) <= g:
            return
        best_g[key] = g
        nodes.append((mx, my, myaw, mz, side_left, px, py, pyaw, parent))
        f = g + heuristic(mx, my, myaw, px, py, pyaw)
        heapq.heappush(open_heap, (f, g, next(counter), len(nodes) - 1))

    # Either foot may move first: seed one virtual root per support side.
    push(
        start.right.x, start.right.y, start.right.yaw, start.right.z, False,
        start.left.x, start.left.y, start.left.yaw, -1, 0.0,
    )
    push(
        start.left.x, start.left.y, start.left.yaw, start.left.z, True,
        start.right.x, start.right.y, start.right.yaw, -1, 0.0,
    )

    expansions = 0
    while open_heap:
        _f, g, _, node_id = heapq.heappop(open_heap)
        mx, my, myaw, mz, side_left, px, py, pyaw, parent = nodes[node_id]
        key = state_key(mx, my, myaw, side_left, px, py, pyaw)
        if g > best_g.get(key, math.inf):
            continue
        # Goal test on pop keeps the returned cost optimal under the
        # admissible heuristic (the start stance was screened above).
        if parent >= 0 and goal_satisfied(mx, my, myaw, px, py, pyaw):
            steps: list[Footstep] = []
            cursor = node_id
            while cursor >= 0:
                nmx, nmy, nmyaw, nmz, nside_left, _, _, _, up = nodes[cursor]
                if up >= 0:
                    steps.append(
                        Footstep(
                            side=Side.LEFT if nside_left else Side.RIGHT,
                            x=nmx, y=nmy, yaw=nmyaw, z=nmz,
                        )
                    )
                cursor = up
            steps.reverse()
            return FootstepPlan(
                id=plan_id,
                goal=goal,
                steps=tuple(steps),
                status=PlanStatus.PROPOSED,
                start=start,
            )
        expansions += 1
        if expansions > config.node_budget:
            raise NoPath(f"node budget {config.node_budget} exhausted for {plan_id}")

        old_mid_x = (mx + px) / 2.0
        old_mid_y = (my + py) / 2.0
        child_side_left = not side_left
        planted_q = (
            round(mx / pos_q), round(my / pos_q), round(myaw / yaw_q)
        )
        for template in templates:
            cx, cy, cyaw = _scalar_place(mx, my, myaw, side_left, template)
            child_g = g + 1.0 + path_weight * math.hypot(
                (cx + mx) / 2.0 - old_mid_x, (cy + my) / 2.0 - old_mid_y
            )
            child_key = (
                child_side_left,
                round(cx / pos_q),
                round(cy / pos_q),
                round(cyaw / yaw_q),
            ) + planted_q
            if best_g.get(child_key, math.inf) <= child_g:
                continue
            in_bounds, z, no_step_hit, spread = grid.probe_footprint(
                cx, cy, cyaw, foot_l, foot_w, dz
            )
            if not in_bounds or no_step_hit or spread:
                continue
            best_g[child_key] = child_g
            nodes.append((cx, cy, cyaw, z, child_side_left, mx, my, myaw, node_id))
            f = child_g + heuristic(cx, cy, cyaw, mx, my, myaw)
            heapq.heappush(open_heap, (f, child_g, next(counter), len(nodes) - 1))

    raise NoPath(f"no reachable goal stance for {plan_id}")
