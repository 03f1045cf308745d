"""Simulated position-controlled DC gear motors with tendon spools.

The plant is kinematic: a PID servo on spool angle produces a velocity
command, saturated at the gearbox output speed and integrated with
explicit Euler. No inertia, torque or friction - the joint-level behavior
we need from the twin is a realistic lag plus encoder quantization, and
the hardware paper names only the motor family, no electrical parameters.

The incremental encoder sits on the motor shaft, so angular resolution at
the spool is 2*pi / (gear_ratio * counts_per_motor_rev) - with the default
100:1 gearbox and 12 CPR encoder that is 2*pi/1200 rad, i.e. 0.02618 mm of
tendon on a 5 mm spool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import _kernels
from .errors import InvalidConfigError

TWO_PI = 2.0 * math.pi

#: Largest accepted integration step, s.
DT_MAX = 0.1


@dataclass(frozen=True)
class MotorConfig:
    spool_radius: float = 5.0
    gear_ratio: float = 100.0
    encoder_counts_per_motor_rev: int = 12
    max_output_speed: float = TWO_PI
    pid_gains: tuple[float, float, float] = (40.0, 0.0, 1.0)

    def validate(self) -> None:
        for name in ("spool_radius", "gear_ratio", "encoder_counts_per_motor_rev", "max_output_speed"):
            if getattr(self, name) <= 0:
                raise InvalidConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        kp, ki, kd = self.pid_gains
        if kp < 0.0 or ki < 0.0 or kd < 0.0:
            raise InvalidConfigError(f"pid_gains must be non-negative, got {self.pid_gains}")

    @property
    def counts_per_output_rev(self) -> float:
        return self.gear_ratio * self.encoder_counts_per_motor_rev

    @property
    def encoder_step(self) -> float:
        """Spool-angle resolution of one encoder count, rad."""
        return TWO_PI / self.counts_per_output_rev


@dataclass(frozen=True)
class MotorState:
    """Spool-side state of one motor. Angles rad, velocity rad/s."""

    target_angle: float = 0.0
    actual_angle: float = 0.0
    velocity: float = 0.0
    encoder_count: int = 0
    integrator: float = 0.0


def homed_state() -> MotorState:
    """State after homing: everything zeroed."""
    return MotorState()


def displacement_to_angle(dl: float, cfg: MotorConfig) -> float:
    """Spool angle winding a tendon displacement, rad (dl in mm)."""
    return dl / cfg.spool_radius


def angle_to_displacement(angle: float, cfg: MotorConfig) -> float:
    """Tendon displacement for a spool angle, mm."""
    return angle * cfg.spool_radius


def encoder_quantize(angle: float, cfg: MotorConfig) -> int:
    """Encoder counts for a spool angle (round half to even)."""
    return int(_kernels.encoder_counts(angle, cfg.counts_per_output_rev))


def encoder_to_angle(count: int, cfg: MotorConfig) -> float:
    """Spool angle at the center of an encoder count, rad."""
    return count / cfg.counts_per_output_rev * TWO_PI


def validate_dt(dt: float) -> None:
    if not 0.0 < dt <= DT_MAX:
        raise InvalidConfigError(f"dt must be in (0, {DT_MAX}] s, got {dt}")


def motor_step(state: MotorState, cfg: MotorConfig, dt: float) -> MotorState:
    """Advance one motor by dt. Deterministic in (state, cfg, dt)."""
    validate_dt(dt)
    kp, ki, kd = cfg.pid_gains
    actual, integ, vel = _kernels.motor_update(
        state.actual_angle,
        state.integrator,
        state.target_angle,
        kp,
        ki,
        kd,
        cfg.max_output_speed,
        dt,
    )
    return replace(
        state,
        actual_angle=float(actual),
        integrator=float(integ),
        velocity=float(vel),
        encoder_count=encoder_quantize(float(actual), cfg),
    )
