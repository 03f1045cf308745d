"""Exception types raised across the package."""


class TjsimError(Exception):
    """Base class for all package errors."""


class InvalidArcError(TjsimError, ValueError):
    """Arc parameters outside their domain (theta or arc length)."""


class InvalidConfigError(TjsimError, ValueError):
    """A configuration field violates its constraint; message names the field."""


class UnreachableTargetError(TjsimError, ValueError):
    """IK target lies outside the bending envelope."""


class DegenerateTargetError(TjsimError, ValueError):
    """IK target coincides with the base origin."""


class StrokeLimitError(TjsimError, ValueError):
    """An allocation would exceed the tendon stroke limit."""


class EStopLatchedError(TjsimError, RuntimeError):
    """Command refused while the e-stop latch is engaged."""


class BadScriptError(TjsimError, ValueError):
    """Waypoint script is malformed; message carries entry/field diagnostics."""


class ProtocolError(TjsimError, ValueError):
    """A teleoperation frame could not be decoded."""

    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail
