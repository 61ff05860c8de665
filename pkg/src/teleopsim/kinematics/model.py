"""Humanoid robot model: joint tree, named chains, validation, file loading.

The model document is YAML. Each joint creates a frame named after the
joint; ``parent`` refers either to the base link or to another joint's
frame, so the link set is implicit. Chains are ordered joint lists; serial
chains (torso, neck, arms) are usable for forward kinematics and IK, the
finger chains are control groups only. The exact field names are fixed by
``data/schema/robot_model.schema.json``.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import jsonschema
import numpy as np
import yaml

from ..errors import MissingJoint, ModelError, ParseError, UnknownChain
from ..geometry import Pose

_AXIS_TOL = 1e-6

SERIAL_CHAINS = ("torso", "neck", "left_arm", "right_arm")
FINGER_CHAINS = ("left_fingers", "right_fingers")
REQUIRED_CHAINS = SERIAL_CHAINS + FINGER_CHAINS

# torso 3, neck 3, 7 arm joints after the shared torso, 4 fingers per hand
_CHAIN_DOF = {
    "torso": 3,
    "neck": 3,
    "left_arm": 10,
    "right_arm": 10,
    "left_fingers": 4,
    "right_fingers": 4,
}


@dataclass(frozen=True)
class JointSpec:
    name: str
    parent: str
    origin: Pose
    axis: np.ndarray
    limits: tuple[float, float]
    max_velocity: float

    def __post_init__(self):
        lo, hi = self.limits
        if not lo < hi:
            raise ModelError(f"joint {self.name}: limit min {lo} must be < max {hi}")
        if self.max_velocity <= 0.0:
            raise ModelError(f"joint {self.name}: max_velocity must be positive")
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        norm = float(np.linalg.norm(axis))
        if abs(norm - 1.0) > _AXIS_TOL:
            raise ModelError(f"joint {self.name}: axis must be a unit vector")
        object.__setattr__(self, "axis", axis / norm)
        object.__setattr__(self, "limits", (float(lo), float(hi)))

    @property
    def mid(self) -> float:
        return (self.limits[0] + self.limits[1]) / 2.0


@dataclass(frozen=True)
class ChainSpec:
    name: str
    joints: tuple[str, ...]
    serial: bool = True
    tip_offset: Pose = field(default_factory=Pose)


@dataclass(frozen=True)
class JointState:
    """Joint positions in radians; finger joints use closure in [0, 1]."""

    positions: dict[str, float]

    def __post_init__(self):
        object.__setattr__(
            self, "positions", {k: float(v) for k, v in self.positions.items()}
        )

    def get(self, name: str) -> float:
        try:
            return self.positions[name]
        except KeyError:
            raise MissingJoint(f"joint state has no entry for {name!r}") from None

    def with_updates(self, updates: dict[str, float]) -> "JointState":
        merged = dict(self.positions)
        merged.update(updates)
        return JointState(merged)


class _CompiledChain:
    """Array form of the base-to-tip path of a serial chain.

    ``path`` holds every movable joint between the base frame and the chain
    tip in order; ``column_index`` marks which path joints belong to the
    chain itself (those are the IK/Jacobian columns). Joints on the path
    but outside the chain (e.g. the torso under the neck) contribute their
    current positions as frozen transforms.
    """

    def __init__(self, model: "RobotModel", chain: ChainSpec):
        path: list[JointSpec] = []
        cursor = model.joints[chain.joints[-1]]
        while True:
            path.append(cursor)
            if cursor.parent == model.base_link:
                break
            cursor = model.joints[cursor.parent]
        path.reverse()

        self.chain = chain
        self.path_names = [j.name for j in path]
        name_to_idx = {n: i for i, n in enumerate(self.path_names)}
        missing = [n for n in chain.joints if n not in name_to_idx]
        if missing:
            raise ModelError(
                f"chain {chain.name}: joints {missing} are not on the path to the base"
            )
        self.column_index = np.array([name_to_idx[n] for n in chain.joints], dtype=int)

        n = len(path)
        self.static_rot = np.empty((n, 3, 3))
        self.static_trans = np.empty((n, 3))
        self.axes = np.empty((n, 3))
        for i, j in enumerate(path):
            self.static_rot[i] = j.origin.rotation()
            self.static_trans[i] = j.origin.position
            self.axes[i] = j.axis
        self.tip_rot = chain.tip_offset.rotation()
        self.tip_trans = np.asarray(chain.tip_offset.position)

        # Pieces for the batched Rodrigues form R = c*I + s*K + (1-c)*aa^T,
        # with the per-joint origin rotation folded in up front.
        self.skew = np.zeros((n, 3, 3))
        self.skew[:, 0, 1] = -self.axes[:, 2]
        self.skew[:, 0, 2] = self.axes[:, 1]
        self.skew[:, 1, 0] = self.axes[:, 2]
        self.skew[:, 1, 2] = -self.axes[:, 0]
        self.skew[:, 2, 0] = -self.axes[:, 1]
        self.skew[:, 2, 1] = self.axes[:, 0]
        self.outer = self.axes[:, :, None] * self.axes[:, None, :]
        self.eye_stack = np.broadcast_to(np.eye(3), (n, 3, 3))
        # Joint axis pre-rotated by its own origin: world axis = R_prev @ this.
        self.rotated_axes = np.einsum("nij,nj->ni", self.static_rot, self.axes)

        limits = np.array([model.joints[n_].limits for n_ in chain.joints])
        self.lo = limits[:, 0].copy()
        self.hi = limits[:, 1].copy()
        self.max_velocity = np.array(
            [model.joints[n_].max_velocity for n_ in chain.joints]
        )
        # Upper bound on tip distance from the base frame: no joint motion
        # can stretch the chain past the summed link offsets.
        self.max_reach = float(
            np.sum(np.linalg.norm(self.static_trans, axis=1))
            + np.linalg.norm(self.tip_trans)
        )

    def extract(self, q: JointState) -> np.ndarray:
        return np.array([q.get(n) for n in self.path_names])


@dataclass(frozen=True)
class RobotModel:
    name: str
    base_link: str
    joints: dict[str, JointSpec]
    chains: dict[str, ChainSpec]
    end_effectors: dict[str, str]

    def __post_init__(self):
        self._validate()
        object.__setattr__(self, "_compiled", {})

    def _validate(self):
        frames = {self.base_link} | set(self.joints)
        for j in self.joints.values():
            if j.parent not in frames:
                raise ModelError(f"joint {j.name}: unknown parent frame {j.parent!r}")
            if j.parent == j.name:
                raise ModelError(f"joint {j.name} cannot be its own parent")
        for name in self.joints:
            self._walk_to_base(name)

        for required in REQUIRED_CHAINS:
            if required not in self.chains:
                raise ModelError(f"model is missing required chain {required!r}")
        for chain in self.chains.values():
            unknown = [n for n in chain.joints if n not in self.joints]
            if unknown:
                raise ModelError(f"chain {chain.name}: unknown joints {unknown}")
            expected = _CHAIN_DOF.get(chain.name)
            if expected is not None and len(chain.joints) != expected:
                raise ModelError(
                    f"chain {chain.name}: expected {expected} joints, "
                    f"got {len(chain.joints)}"
                )
            if chain.serial:
                for prev, cur in zip(chain.joints, chain.joints[1:]):
                    if self.joints[cur].parent != prev:
                        raise ModelError(
                            f"chain {chain.name}: {cur} does not follow {prev}"
                        )
        for arm in ("left_arm", "right_arm"):
            torso = self.chains["torso"].joints
            if self.chains[arm].joints[: len(torso)] != torso:
                raise ModelError(f"chain {arm} must start with the torso joints")
        for side, chain_name in self.end_effectors.items():
            if chain_name not in self.chains:
                raise ModelError(f"end effector {side}: unknown chain {chain_name!r}")

    def _walk_to_base(self, joint_name: str) -> None:
        seen = set()
        cursor = joint_name
        while cursor != self.base_link:
            if cursor in seen:
                raise ModelError(f"joint {joint_name} is part of a parent cycle")
            seen.add(cursor)
            cursor = self.joints[cursor].parent

    def chain(self, name: str) -> ChainSpec:
        try:
            return self.chains[name]
        except KeyError:
            raise UnknownChain(f"model has no chain {name!r}") from None

    def serial_chain(self, name: str) -> ChainSpec:
        chain = self.chain(name)
        if not chain.serial:
            raise UnknownChain(
                f"chain {name!r} is a control group, not a serial kinematic chain"
            )
        return chain

    def compiled(self, name: str) -> _CompiledChain:
        cache = self.__dict__["_compiled"]
        if name not in cache:
            cache[name] = _CompiledChain(self, self.serial_chain(name))
        return cache[name]

    def zero_state(self) -> JointState:
        return clamp_to_limits(
            self, JointState({name: 0.0 for name in self.joints})
        )

    def mid_range_state(self) -> JointState:
        return JointState({name: j.mid for name, j in self.joints.items()})

    def finger_joints(self, side: str) -> tuple[str, ...]:
        return self.chains[f"{side}_fingers"].joints


def clamp_to_limits(model: RobotModel, q: JointState) -> JointState:
    """Clamp every model joint into its limit interval (idempotent).

    Entries in ``q`` that are not model joints pass through unchanged.
    """
    clamped = dict(q.positions)
    for name, spec in model.joints.items():
        lo, hi = spec.limits
        clamped[name] = min(max(q.get(name), lo), hi)
    return JointState(clamped)


def _load_schema() -> dict:
    text = (
        importlib.resources.files("teleopsim")
        .joinpath("data/schema/robot_model.schema.json")
        .read_text()
    )
    return json.loads(text)


def load_robot_model(document: str) -> RobotModel:
    """Parse and validate a robot model document.

    Raises ParseError for malformed documents and ModelError for
    structurally invalid models (wrong DOF counts, disconnected chains,
    inverted limits).
    """
    try:
        raw = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        raise ParseError(f"model document is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("model document must be a mapping")
    try:
        jsonschema.validate(raw, _load_schema())
    except jsonschema.ValidationError as exc:
        raise ParseError(f"model document violates the schema: {exc.message}") from exc

    joints: dict[str, JointSpec] = {}
    for entry in raw["joints"]:
        name = entry["name"]
        if name in joints:
            raise ModelError(f"duplicate joint name {name!r}")
        origin = entry.get("origin", {})
        joints[name] = JointSpec(
            name=name,
            parent=entry["parent"],
            origin=Pose.from_xyzrpy(
                origin.get("xyz", [0.0, 0.0, 0.0]), origin.get("rpy", [0.0, 0.0, 0.0])
            ),
            axis=np.asarray(entry["axis"], dtype=float),
            limits=(entry["limits"][0], entry["limits"][1]),
            max_velocity=entry["max_velocity"],
        )

    chains: dict[str, ChainSpec] = {}
    for name, entry in raw["chains"].items():
        offset = entry.get("tip_offset", {})
        chains[name] = ChainSpec(
            name=name,
            joints=tuple(entry["joints"]),
            serial=entry.get("serial", True),
            tip_offset=Pose.from_xyzrpy(
                offset.get("xyz", [0.0, 0.0, 0.0]), offset.get("rpy", [0.0, 0.0, 0.0])
            ),
        )

    return RobotModel(
        name=raw.get("name", "robot"),
        base_link=raw["base_link"],
        joints=joints,
        chains=chains,
        end_effectors=dict(raw.get("end_effectors", {"left": "left_arm", "right": "right_arm"})),
    )


def default_model_text() -> str:
    return (
        importlib.resources.files("teleopsim")
        .joinpath("data/robot_model.yaml")
        .read_text()
    )


@lru_cache(maxsize=1)
def load_default_model() -> RobotModel:
    return load_robot_model(default_model_text())
