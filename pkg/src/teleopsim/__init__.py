"""Desk-scale shared-control teleoperation stack for a simulated humanoid.

Subpackages:
    kinematics  robot model, forward kinematics, damped-least-squares IK
    footsteps   height maps, footstep validation, A* planning, plan editing
    sim         deterministic fixed-tick world simulator
    protocol    wire codec and the asyncio teleop server
"""

__version__ = "0.1.0"
