"""Simulation parameters, collected in one block so nothing is scattered."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SimParams:
    dt: float = 0.02                       # fixed tick, seconds
    step_duration: float = 1.2             # seconds per footstep
    deadman_timeout: float = 0.2           # joystick refresh window, seconds
    joystick_max_speed: float = 0.5        # m/s full deflection
    joystick_max_yaw_rate: float = 0.5     # rad/s full deflection
    grasp_attach_distance: float = 0.05    # palm to grasp point, meters
    grasp_attach_closure: float = 0.8      # mean finger closure to attach
    grasp_release_closure: float = 0.4     # mean finger closure to release
    battery_idle_rate: float = 0.01        # percent per second
    battery_motion_rate: float = 0.05      # extra percent per second in motion
    battery_low_threshold: float = 20.0    # percent
    pelvis_height: float = 1.0             # base frame above mean foot height
    setpoint_epsilon: float = 1e-9         # "joint arrived" threshold, radians
    snapshot_every: int = 10               # log snapshot cadence, ticks

    def __post_init__(self):
        if self.dt <= 0 or self.step_duration <= 0:
            raise ValueError("dt and step_duration must be positive")
        if self.deadman_timeout <= 0:
            raise ValueError("deadman_timeout must be positive")
        if not 0 < self.grasp_release_closure < self.grasp_attach_closure <= 1:
            raise ValueError("grasp closure thresholds must satisfy 0 < release < attach <= 1")

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, raw: dict) -> "SimParams":
        kwargs = {}
        for name, value in raw.items():
            if name not in cls.__dataclass_fields__:
                raise ValueError(f"unknown simulation parameter {name!r}")
            kwargs[name] = int(value) if name == "snapshot_every" else float(value)
        return cls(**kwargs)
