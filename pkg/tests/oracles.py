"""Independent reference implementations the test suite checks against.

Everything here deliberately avoids the package's own math paths: rotations
go through scipy, kinematics through raw 4x4 matrix chains built from the
raw YAML document, footprint coverage through shapely polygons. Keep it
slow and obvious.
"""

from __future__ import annotations

import math

import numpy as np
import yaml
from scipy.spatial.transform import Rotation
from shapely.geometry import Point, Polygon

from teleopsim.geometry import Pose, rot_from_quat


# --- kinematics -----------------------------------------------------------

def _origin_matrix(entry: dict) -> np.ndarray:
    origin = entry.get("origin", {})
    xyz = origin.get("xyz", [0.0, 0.0, 0.0])
    rpy = origin.get("rpy", [0.0, 0.0, 0.0])
    mat = np.eye(4)
    mat[:3, :3] = Rotation.from_euler("xyz", rpy).as_matrix()
    mat[:3, 3] = xyz
    return mat


def fk_matrix_chain(model_yaml: str, positions: dict, chain_name: str) -> np.ndarray:
    """4x4 tip transform computed straight from the raw model document."""
    doc = yaml.safe_load(model_yaml)
    joints = {j["name"]: j for j in doc["joints"]}
    chain = doc["chains"][chain_name]

    path = []
    cursor = joints[chain["joints"][-1]]
    while True:
        path.append(cursor)
        if cursor["parent"] == doc["base_link"]:
            break
        cursor = joints[cursor["parent"]]
    path.reverse()

    tf = np.eye(4)
    for entry in path:
        tf = tf @ _origin_matrix(entry)
        spin = np.eye(4)
        axis = np.asarray(entry["axis"], dtype=float)
        axis = axis / np.linalg.norm(axis)
        spin[:3, :3] = Rotation.from_rotvec(axis * positions[entry["name"]]).as_matrix()
        tf = tf @ spin
    tf = tf @ _origin_matrix({"origin": chain.get("tip_offset", {})})
    return tf


def finite_difference_jacobian(fk, q_vec: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference geometric Jacobian of a pose-valued function.

    ``fk`` maps a joint vector to a Pose; angular rows come from the
    rotation-difference log divided by the step.
    """
    n = q_vec.shape[0]
    jac = np.empty((6, n))
    for i in range(n):
        plus = q_vec.copy()
        minus = q_vec.copy()
        plus[i] += step
        minus[i] -= step
        pose_p: Pose = fk(plus)
        pose_m: Pose = fk(minus)
        jac[:3, i] = (pose_p.position - pose_m.position) / (2.0 * step)
        rel = rot_from_quat(pose_p.orientation) @ rot_from_quat(pose_m.orientation).T
        jac[3:, i] = Rotation.from_matrix(rel).as_rotvec() / (2.0 * step)
    return jac


# --- footsteps ------------------------------------------------------------

def foot_polygon(x: float, y: float, yaw: float, length: float, width: float) -> Polygon:
    c, s = math.cos(yaw), math.sin(yaw)
    half_l, half_w = length / 2.0, width / 2.0
    corners = []
    for dx, dy in ((half_l, half_w), (half_l, -half_w), (-half_l, -half_w), (-half_l, half_w)):
        corners.append((x + c * dx - s * dy, y + s * dx + c * dy))
    return Polygon(corners)


def covered_cells_shapely(grid, x: float, y: float, yaw: float, length: float, width: float):
    """Cells whose center lies inside the oriented foot rectangle."""
    poly = foot_polygon(x, y, yaw, length, width)
    hits = []
    for iy in range(grid.height_cells):
        for ix in range(grid.width_cells):
            cx, cy = grid.cell_center(ix, iy)
            if poly.intersects(Point(cx, cy)):
                hits.append((ix, iy))
    return hits


def transition_violations_reference(stance, candidate, limits) -> set:
    """Re-derivation of the step-to-step feasibility bounds."""
    rel_x = candidate.x - stance.x
    rel_y = candidate.y - stance.y
    c, s = math.cos(-stance.yaw), math.sin(-stance.yaw)
    dx = c * rel_x - s * rel_y
    dy = s * rel_x + c * rel_y
    dyaw = math.atan2(
        math.sin(candidate.yaw - stance.yaw), math.cos(candidate.yaw - stance.yaw)
    )

    found = set()
    eps = 1e-9
    if dx > limits.max_forward + eps:
        found.add("OUT_OF_REACH_FORWARD")
    if dx < -limits.max_backward - eps:
        found.add("OUT_OF_REACH_BACKWARD")
    side_sign = -1.0 if stance.side == "left" else 1.0
    lateral = dy * side_sign  # positive = away from the stance foot
    if lateral < limits.min_lateral_separation - eps:
        found.add("CROSSED_FEET")
    if lateral > limits.max_lateral + eps:
        found.add("OUT_OF_REACH_LATERAL")
    if abs(dyaw) > limits.max_yaw_per_step + eps:
        found.add("YAW_EXCEEDED")
    return found


def plan_report_reference(grid, plan, start, limits) -> list:
    """Brute-force per-step re-check of a whole plan: snap validity through
    shapely coverage, feasibility through the reference bounds, plus side
    alternation. Mirrors the (index, code) report shape."""
    report = []
    steps = plan.steps
    for i, step in enumerate(steps):
        corners = foot_polygon(
            step.x, step.y, step.yaw, limits.foot_length, limits.foot_width
        ).exterior.coords
        oob = any(
            not (
                grid.origin_x <= cx <= grid.origin_x + grid.width_m
                and grid.origin_y <= cy <= grid.origin_y + grid.height_m
            )
            for cx, cy in corners
        )
        if oob:
            report.append((i, "OUT_OF_BOUNDS"))
        else:
            cells = covered_cells_shapely(
                grid, step.x, step.y, step.yaw, limits.foot_length, limits.foot_width
            )
            if any(grid.no_step[iy, ix] for ix, iy in cells):
                report.append((i, "NO_STEP_CELL"))
            zs = [grid.heights[iy, ix] for ix, iy in cells]
            if zs and max(zs) - min(zs) > limits.max_height_delta:
                report.append((i, "HEIGHT_SPREAD"))
        if i > 0:
            support = steps[i - 1]
        elif start is not None:
            support = start.left if step.side.value == "right" else start.right
        else:
            support = None
        if support is not None:
            if support.side == step.side:
                report.append((i, "ALTERNATION"))
            else:
                for code in sorted(
                    transition_violations_reference(support, step, limits)
                ):
                    report.append((i, code))
    return report


def bfs_optimal_step_count(grid, start, goal, limits, templates, config, max_depth=25):
    """Breadth-first search over the same stance graph the planner uses
    (identical templates and duplicate quantization), returning the minimum
    number of steps to a goal stance, or None when unreachable."""
    from collections import deque

    from teleopsim.footsteps import snap_footstep

    def mean_yaw(a, b):
        return math.atan2(math.sin(a) + math.sin(b), math.cos(a) + math.cos(b))

    def wrap(a):
        return math.atan2(math.sin(a), math.cos(a))

    def satisfied(moved, planted):
        mx = (moved.x + planted.x) / 2.0
        my = (moved.y + planted.y) / 2.0
        yaw = mean_yaw(moved.yaw, planted.yaw)
        return (
            math.hypot(mx - goal.x, my - goal.y) <= limits.goal_position_tolerance
            and abs(wrap(yaw - goal.yaw)) <= limits.goal_yaw_tolerance
        )

    def key(moved, planted):
        q, yq = config.position_quantum, config.yaw_quantum
        return (
            moved.side.value,
            round(moved.x / q),
            round(moved.y / q),
            round(moved.yaw / yq),
            round(planted.x / q),
            round(planted.y / q),
            round(planted.yaw / yq),
        )

    frontier = deque()
    seen = set()
    for moved, planted in ((start.right, start.left), (start.left, start.right)):
        frontier.append((moved, planted, 0))
        seen.add(key(moved, planted))
    while frontier:
        moved, planted, depth = frontier.popleft()
        if depth > 0 and satisfied(moved, planted):
            return depth
        if depth >= max_depth:
            continue
        for template in templates:
            candidate = template.place(moved)
            try:
                snapped = snap_footstep(grid, candidate, limits)
            except Exception:
                continue
            if not snapped.valid:
                continue
            k = key(snapped, moved)
            if k in seen:
                continue
            seen.add(k)
            frontier.append((snapped, moved, depth + 1))
    return None
