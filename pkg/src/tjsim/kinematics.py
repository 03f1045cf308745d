"""Constant-curvature kinematics of the bending joint.

The joint is modelled as a single circular arc of fixed length. An arc is
parameterized by the bend angle ``theta`` (angle subtended by the arc),
the bend-plane angle ``phi`` (rotation of the bending plane about the base
z axis, x toward phi = 0) and the arc length in mm. The base frame has z
along the straight joint axis.

Tip position for theta > 0:

    p = (L/theta) * ((1 - cos theta) cos phi, (1 - cos theta) sin phi, sin theta)

with the theta -> 0 limit (0, 0, L) taken through a series expansion so the
map is continuous through straight. Tip orientation is the roll-then-bend
composition Rz(phi) @ Ry(theta); its theta -> 0 limit is the pure phi roll.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateTargetError, InvalidArcError, InvalidConfigError, UnreachableTargetError

TWO_PI = 2.0 * math.pi

#: Soft command limit on the bend angle; the paper's joint reaches ~90 deg.
THETA_MAX_DEFAULT = math.pi / 2.0


def wrap_angle(phi: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    return float(_kernels.wrap_angle(float(phi)))


@dataclass(frozen=True)
class ArcParams:
    """Bend angle (rad), bend-plane angle (rad, wrapped) and arc length (mm).

    fk accepts any theta in [0, pi]; the tighter operating limit
    (theta_max, default pi/2) is enforced where commands enter the system,
    not here.
    """

    theta: float
    phi: float
    arc_length: float

    def __post_init__(self):
        if not math.isfinite(self.theta) or not 0.0 <= self.theta <= math.pi:
            raise InvalidArcError(f"theta must be in [0, pi], got {self.theta}")
        if not math.isfinite(self.arc_length) or self.arc_length <= 0.0:
            raise InvalidArcError(f"arc_length must be > 0 mm, got {self.arc_length}")
        if not math.isfinite(self.phi):
            raise InvalidArcError(f"phi must be finite, got {self.phi}")
        object.__setattr__(self, "phi", wrap_angle(self.phi))


@dataclass(frozen=True)
class Pose:
    """Position (mm) and rotation matrix of a frame in the base frame."""

    position: np.ndarray
    orientation: np.ndarray

    ORTHONORMAL_TOL = 1e-9

    def __post_init__(self):
        position = np.asarray(self.position, dtype=float).reshape(3)
        orientation = np.asarray(self.orientation, dtype=float).reshape(3, 3)
        err = np.abs(orientation @ orientation.T - np.eye(3)).max()
        if err > self.ORTHONORMAL_TOL or abs(np.linalg.det(orientation) - 1.0) > self.ORTHONORMAL_TOL:
            raise InvalidConfigError(f"orientation is not a proper rotation (deviation {err:.3g})")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "orientation", orientation)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.zeros(3), np.eye(3))


@dataclass(frozen=True)
class RingStackConfig:
    """Discrete ring stack approximating the arc.

    Rings are rigid; all bending happens at the ring_count - 1 gaps in
    equal shares. The joint length is a free design parameter of the twin
    (the hardware paper does not state one).
    """

    ring_count: int = 8
    ring_outer_diameter: float = 7.0
    segment_arc_length: float = 40.0

    def validate(self, pitch_radius: float | None = None) -> None:
        if self.ring_count < 2:
            raise InvalidConfigError(f"ring_count must be >= 2, got {self.ring_count}")
        if self.ring_outer_diameter <= 0.0:
            raise InvalidConfigError(f"ring_outer_diameter must be > 0, got {self.ring_outer_diameter}")
        if self.segment_arc_length <= 0.0:
            raise InvalidConfigError(f"segment_arc_length must be > 0, got {self.segment_arc_length}")
        if pitch_radius is not None and self.ring_outer_diameter <= 2.0 * pitch_radius:
            raise InvalidConfigError(
                f"ring_outer_diameter ({self.ring_outer_diameter}) must exceed "
                f"twice the tendon pitch radius ({2.0 * pitch_radius})"
            )

    @property
    def gap_count(self) -> int:
        return self.ring_count - 1


@dataclass(frozen=True)
class CatheterSpec:
    """Carried catheter dimensions; metadata for reporting, not simulated."""

    catheter_diameter: float = 3.2
    catheter_length: float = 1300.0
    tendon_wire_diameter: float = 0.16

    def validate(self, ring_outer_diameter: float | None = None) -> None:
        for name in ("catheter_diameter", "catheter_length", "tendon_wire_diameter"):
            if getattr(self, name) <= 0.0:
                raise InvalidConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if ring_outer_diameter is not None and self.catheter_diameter >= ring_outer_diameter:
            raise InvalidConfigError(
                f"catheter_diameter ({self.catheter_diameter}) must be smaller "
                f"than the ring outer diameter ({ring_outer_diameter})"
            )


def bend_rotation(theta: float, phi: float) -> np.ndarray:
    """Rotation Rz(phi) @ Ry(theta) of the arc-end frame."""
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    return np.array(
        [
            [cp * ct, -sp, cp * st],
            [sp * ct, cp, sp * st],
            [-st, 0.0, ct],
        ]
    )


def fk_tip(arc: ArcParams) -> Pose:
    """Pose of the arc tip in the base frame."""
    x, y, z = _kernels.tip_position(arc.theta, arc.phi, arc.arc_length)
    return Pose(np.array([x, y, z]), bend_rotation(arc.theta, arc.phi))


def fk_ring_poses(arc: ArcParams, stack: RingStackConfig) -> list[Pose]:
    """Poses of every ring, base ring first (identity), tip ring last.

    Ring k sits at the end of the partial arc with bend theta*k/(N-1) and
    length L*k/(N-1), so consecutive ring z axes differ by theta/(N-1)
    everywhere along the stack.
    """
    stack.validate()
    gaps = stack.gap_count
    poses = [Pose.identity()]
    for k in range(1, stack.ring_count):
        frac = k / gaps
        sub = ArcParams(arc.theta * frac, arc.phi, arc.arc_length * frac)
        poses.append(fk_tip(sub))
    return poses


def ik_tip(
    target,
    arc_length: float,
    theta_max: float = THETA_MAX_DEFAULT,
) -> tuple[ArcParams, float]:
    """Invert the tip map for a position target.

    Returns the arc parameters together with the consistency residual
    |L_implied - arc_length| in mm, where L_implied = theta*z/sin(theta)
    (z in the straight limit). The residual tells the caller how far the
    target is from the sphere of positions this arc length can actually
    reach; rejecting on it is the caller's decision.
    """
    x, y, z = (float(v) for v in target)
    if arc_length <= 0.0:
        raise InvalidArcError(f"arc_length must be > 0 mm, got {arc_length}")
    rho = math.hypot(x, y)
    if math.sqrt(rho * rho + z * z) < 1e-9:
        raise DegenerateTargetError("target coincides with the base origin")
    if z < 0.0:
        raise UnreachableTargetError(f"target z must be >= 0 mm, got {z}")
    theta = 2.0 * math.atan2(rho, z)
    if theta > theta_max:
        raise UnreachableTargetError(
            f"required bend {theta:.6f} rad exceeds theta_max {theta_max:.6f} rad"
        )
    phi = 0.0 if rho < 1e-9 else wrap_angle(math.atan2(y, x))
    if theta < _kernels.SMALL_THETA:
        implied_length = z
    else:
        implied_length = theta * z / math.sin(theta)
    residual = abs(implied_length - arc_length)
    return ArcParams(theta, phi, arc_length), residual


def arc_jacobian(arc: ArcParams) -> np.ndarray:
    """3x2 matrix of tip-position partials w.r.t. (theta, phi), mm/rad.

    The phi column vanishes at theta = 0 (the tip sits on the axis, the
    bend plane has no effect).
    """
    cols = _kernels.tip_jacobian_cols(arc.theta, arc.phi, arc.arc_length)
    return np.asarray(cols, dtype=float).reshape(2, 3).T.copy()
