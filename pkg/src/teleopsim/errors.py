"""Exception hierarchy shared across the stack."""


class TeleopSimError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TeleopSimError):
    """A document (model, world, script, log) could not be parsed."""


class ModelError(TeleopSimError):
    """A robot model document is structurally invalid."""


class UnknownChain(TeleopSimError):
    """Chain name not declared in the robot model, or not usable here."""


class MissingJoint(TeleopSimError):
    """A joint required by the operation is absent from the joint state."""


class OutOfBounds(TeleopSimError):
    """A footprint or object lies outside the height map."""


class SameSide(TeleopSimError):
    """Step transition checked between two footsteps of the same side."""


class NoPath(TeleopSimError):
    """Footstep search exhausted its node budget without reaching the goal."""


class InvalidStart(TeleopSimError):
    """Start stance is not valid on the map."""


class IndexOutOfRange(TeleopSimError):
    """Footstep index outside the plan."""


class PlanLocked(TeleopSimError):
    """Plan is not in an editable lifecycle state."""


class LifecycleError(TeleopSimError):
    """Illegal plan status transition."""


class WorldError(TeleopSimError):
    """A world document is semantically invalid."""


class CommandError(TeleopSimError):
    """Base class for command rejections; carries a stable code for the wire."""

    code = "COMMAND_ERROR"


class WrongMode(CommandError):
    code = "WRONG_MODE"


class UnknownPlan(CommandError):
    code = "UNKNOWN_PLAN"


class IkFailed(CommandError):
    code = "IK_FAILED"


class UnknownJoint(CommandError):
    code = "UNKNOWN_JOINT"


class CodecError(TeleopSimError):
    """A wire frame could not be decoded into a valid message."""


class ProtocolError(TeleopSimError):
    """Session-level protocol violation (e.g. sequence regression)."""


class AuthorityDenied(TeleopSimError):
    """A second operator attempted to claim command authority."""
