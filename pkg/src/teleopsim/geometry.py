"""Minimal 3-D rigid-transform math used by the kinematics and simulator.

Quaternions are stored as (w, x, y, z) numpy arrays and kept unit-norm.
All helpers are pure functions over float64 arrays so results are
bit-reproducible for identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_UNIT_TOL = 1e-9


def wrap_angle(a: float) -> float:
    """Normalize an angle to the half-open interval (-pi, pi]."""
    return math.pi - (math.pi - a) % (2.0 * math.pi)


def rot_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation matrix about a unit axis (Rodrigues formula)."""
    x, y, z = axis
    c = math.cos(angle)
    s = math.sin(angle)
    t = 1.0 - c
    return np.array(
        [
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
            [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
        ]
    )


def rot_from_rotvec(v: np.ndarray) -> np.ndarray:
    angle = float(np.linalg.norm(v))
    if angle < 1e-12:
        return np.eye(3)
    return rot_from_axis_angle(v / angle, angle)


def rotvec_from_rot(rot: np.ndarray) -> np.ndarray:
    """Axis-angle log map; magnitude in [0, pi]."""
    trace = float(np.trace(rot))
    cos_a = max(-1.0, min(1.0, (trace - 1.0) / 2.0))
    angle = math.acos(cos_a)
    if angle < 1e-12:
        return np.zeros(3)
    if angle > math.pi - 1e-6:
        # Near pi the off-diagonal differences vanish; recover the axis
        # from the symmetric part instead.
        axis_sq = (np.diag(rot) + 1.0) / 2.0
        axis = np.sqrt(np.maximum(axis_sq, 0.0))
        # Fix signs using the largest component.
        k = int(np.argmax(axis))
        if axis[k] > 0.0:
            i, j = (k + 1) % 3, (k + 2) % 3
            axis[i] = math.copysign(axis[i], rot[k, i] + rot[i, k])
            axis[j] = math.copysign(axis[j], rot[k, j] + rot[j, k])
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            return np.zeros(3)
        return axis / norm * angle
    d = np.array(
        [rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0], rot[1, 0] - rot[0, 1]]
    )
    return d / (2.0 * math.sin(angle)) * angle


def quat_normalize(q: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(q))
    if n < 1e-12:
        raise ValueError("cannot normalize a zero quaternion")
    q = q / n
    # Canonical sign: w >= 0 keeps round-trips stable.
    if q[0] < 0.0:
        q = -q
    return q


def quat_from_rot(rot: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) from a rotation matrix (Shepperd)."""
    m = rot
    trace = m[0, 0] + m[1, 1] + m[2, 2]
    if trace > 0.0:
        s = math.sqrt(trace + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        )
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = np.array(
            [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
        )
    elif m[1, 1] > m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = np.array(
            [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
        )
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = np.array(
            [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
        )
    return quat_normalize(q)


def rot_from_quat(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_yaw(yaw: float) -> np.ndarray:
    half = yaw / 2.0
    return quat_normalize(np.array([math.cos(half), 0.0, 0.0, math.sin(half)]))


def yaw_from_quat(q: np.ndarray) -> float:
    w, x, y, z = q
    return math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))


@dataclass(frozen=True)
class Pose:
    """Rigid pose: position in meters, orientation as a unit quaternion."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(3)
        quat = np.asarray(self.orientation, dtype=float).reshape(4)
        if abs(np.linalg.norm(quat) - 1.0) > _UNIT_TOL:
            raise ValueError("orientation quaternion must be unit-norm")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", quat)

    @staticmethod
    def from_matrix(rot: np.ndarray, trans: np.ndarray) -> "Pose":
        return Pose(np.asarray(trans, dtype=float), quat_from_rot(rot))

    @staticmethod
    def from_xyzrpy(xyz, rpy) -> "Pose":
        roll, pitch, yaw = rpy
        rot = (
            rot_from_axis_angle(np.array([0.0, 0.0, 1.0]), yaw)
            @ rot_from_axis_angle(np.array([0.0, 1.0, 0.0]), pitch)
            @ rot_from_axis_angle(np.array([1.0, 0.0, 0.0]), roll)
        )
        return Pose(np.asarray(xyz, dtype=float), quat_from_rot(rot))

    def rotation(self) -> np.ndarray:
        return rot_from_quat(self.orientation)

    def compose(self, other: "Pose") -> "Pose":
        rot = self.rotation()
        return Pose(
            self.position + rot @ other.position,
            quat_normalize(quat_mul(self.orientation, other.orientation)),
        )

    def inverse(self) -> "Pose":
        rot_t = self.rotation().T
        w, x, y, z = self.orientation
        inv_q = quat_normalize(np.array([w, -x, -y, -z]))
        return Pose(-(rot_t @ self.position), inv_q)

    def transform_point(self, point: np.ndarray) -> np.ndarray:
        return self.position + self.rotation() @ np.asarray(point, dtype=float)

    def to_dict(self) -> dict:
        p, q = self.position, self.orientation
        return {
            "x": float(p[0]),
            "y": float(p[1]),
            "z": float(p[2]),
            "qw": float(q[0]),
            "qx": float(q[1]),
            "qy": float(q[2]),
            "qz": float(q[3]),
        }

    @staticmethod
    def from_dict(d: dict) -> "Pose":
        pos = np.array([d.get("x", 0.0), d.get("y", 0.0), d.get("z", 0.0)], dtype=float)
        if "qw" in d:
            quat = quat_normalize(
                np.array([d["qw"], d.get("qx", 0.0), d.get("qy", 0.0), d.get("qz", 0.0)], dtype=float)
            )
        else:
            quat = quat_from_yaw(float(d.get("yaw", 0.0)))
        return Pose(pos, quat)


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def orientation_error(target_rot: np.ndarray, current_rot: np.ndarray) -> np.ndarray:
    """Axis-angle vector rotating ``current`` onto ``target`` (world frame)."""
    return rotvec_from_rot(target_rot @ current_rot.T)
