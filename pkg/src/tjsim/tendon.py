"""Four-tendon paired actuation of the bending joint.

Opposing tendons are displaced by equal and opposite amounts: when the
joint bends by theta in plane phi, the tendon routed at angle beta on the
pitch circle changes path length by

    dl = -r * theta * cos(beta - phi)        (mm, negative = pulled)

so each tendon and its 180-degree partner always sum to zero and the
antagonist stays nominally taut. ``deallocate`` inverts the map in the
least-squares sense, which for the 90-degree layout reduces to two pair
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidConfigError, StrokeLimitError
from .kinematics import THETA_MAX_DEFAULT, wrap_angle

_DEFAULT_ANGLES = (0.0, math.pi / 2.0, math.pi, 3.0 * math.pi / 2.0)


@dataclass(frozen=True)
class TendonLayout:
    """Tendon channel geometry: pitch radius (mm) and the four channel
    angles (rad, ascending, opposing pairs 180 degrees apart)."""

    pitch_radius: float = 2.5
    angles: tuple[float, float, float, float] = _DEFAULT_ANGLES
    stroke_limit: float | None = None

    def __post_init__(self):
        if self.stroke_limit is None:
            object.__setattr__(self, "stroke_limit", self.pitch_radius * THETA_MAX_DEFAULT)

    def validate(self) -> None:
        if self.pitch_radius <= 0.0:
            raise InvalidConfigError(f"pitch_radius must be > 0, got {self.pitch_radius}")
        if len(self.angles) != 4:
            raise InvalidConfigError(f"exactly 4 tendon angles required, got {len(self.angles)}")
        a = list(self.angles)
        if any(not 0.0 <= b < 2.0 * math.pi for b in a) or sorted(a) != a:
            raise InvalidConfigError(f"angles must be ascending in [0, 2*pi), got {a}")
        for i in range(2):
            if abs(a[i + 2] - a[i] - math.pi) > 1e-12:
                raise InvalidConfigError(
                    f"tendons {i} and {i + 2} must oppose (180 deg apart), "
                    f"got {a[i]} and {a[i + 2]}"
                )
        if self.stroke_limit <= 0.0:
            raise InvalidConfigError(f"stroke_limit must be > 0, got {self.stroke_limit}")

    def angles_array(self) -> np.ndarray:
        return np.asarray(self.angles, dtype=float)


@dataclass(frozen=True)
class BendCommand:
    """Commanded bend: angle theta and plane phi, radians.

    phi is wrapped to [0, 2*pi). The operating limit theta_max is applied
    where commands enter the simulation (clamp + flag), so the type itself
    accepts the full [0, pi] modelling range.
    """

    theta: float
    phi: float

    def __post_init__(self):
        if not math.isfinite(self.theta) or not 0.0 <= self.theta <= math.pi:
            raise InvalidConfigError(f"theta must be in [0, pi], got {self.theta}")
        if not math.isfinite(self.phi):
            raise InvalidConfigError(f"phi must be finite, got {self.phi}")
        object.__setattr__(self, "phi", wrap_angle(self.phi))


@dataclass(frozen=True)
class TendonDisplacements:
    """Signed tendon length changes in mm; negative = shortened (pulled)."""

    dl: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dl", np.asarray(self.dl, dtype=float).reshape(4))

    def __getitem__(self, i: int) -> float:
        return float(self.dl[i])

    def __len__(self) -> int:
        return 4

    def pair_sums(self) -> tuple[float, float]:
        return float(self.dl[0] + self.dl[2]), float(self.dl[1] + self.dl[3])


@dataclass(frozen=True)
class LimitReport:
    """Per-tendon stroke violations: (tendon index, overshoot mm)."""

    violations: tuple[tuple[int, float], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def allocate(cmd: BendCommand, layout: TendonLayout) -> TendonDisplacements:
    """Tendon displacements realizing a bend command."""
    layout.validate()
    out = np.empty(4)
    _kernels.allocate4(cmd.theta, cmd.phi, layout.pitch_radius, layout.angles_array(), out)
    worst = float(np.abs(out).max())
    if worst > layout.stroke_limit:
        raise StrokeLimitError(
            f"allocation needs {worst:.6f} mm of stroke, limit is {layout.stroke_limit:.6f} mm"
        )
    return TendonDisplacements(out)


def deallocate(
    dl: TendonDisplacements | np.ndarray, layout: TendonLayout
) -> tuple[BendCommand, float]:
    """Least-squares bend decode of four displacements.

    Total on any input; inconsistency with the paired model is reported
    through the residual (mm), never raised.
    """
    layout.validate()
    arr = dl.dl if isinstance(dl, TendonDisplacements) else np.asarray(dl, dtype=float).reshape(4)
    theta, phi, resid = _kernels.deallocate4(arr, layout.pitch_radius)
    return BendCommand(float(theta), float(phi)), float(resid)


def check_limits(dl: TendonDisplacements | np.ndarray, layout: TendonLayout) -> LimitReport:
    """Report every tendon whose |dl| exceeds the stroke limit."""
    arr = dl.dl if isinstance(dl, TendonDisplacements) else np.asarray(dl, dtype=float).reshape(4)
    violations = []
    for i in range(4):
        over = abs(float(arr[i])) - layout.stroke_limit
        if over > 0.0:
            violations.append((i, over))
    return LimitReport(tuple(violations))
