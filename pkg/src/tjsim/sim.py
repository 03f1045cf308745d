"""Stepped simulation of the full joint.

Each step: interpolate the commanded bend, allocate it to paired tendon
displacements, convert to spool targets, advance the four motor servos,
read the achieved displacements back through the quantized encoders,
decode the achieved bend and evaluate the tip pose. The achieved bend is
decoded from motor positions rather than copied from the command - the
controller lag and the encoder resolution are exactly what the twin is
supposed to make observable.

Commanded trajectories are linear in (theta, phi) with phi taken along the
shorter angular direction. The loop is single-owner: one JointSim is
stepped by one caller; snapshots are immutable and free to share.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .actuation import MotorConfig, MotorState, validate_dt
from .errors import BadScriptError, EStopLatchedError, InvalidConfigError
from .kinematics import (
    THETA_MAX_DEFAULT,
    ArcParams,
    CatheterSpec,
    Pose,
    RingStackConfig,
    bend_rotation,
    fk_ring_poses,
)
from .tendon import BendCommand, TendonDisplacements, TendonLayout

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SimConfig:
    stack: RingStackConfig = field(default_factory=RingStackConfig)
    layout: TendonLayout = field(default_factory=TendonLayout)
    motor: MotorConfig = field(default_factory=MotorConfig)
    catheter: CatheterSpec = field(default_factory=CatheterSpec)
    dt: float = 1e-3
    theta_max: float = THETA_MAX_DEFAULT

    def validate(self) -> None:
        self.layout.validate()
        self.stack.validate(pitch_radius=self.layout.pitch_radius)
        self.motor.validate()
        self.catheter.validate(ring_outer_diameter=self.stack.ring_outer_diameter)
        try:
            validate_dt(self.dt)
        except InvalidConfigError as exc:
            raise InvalidConfigError(f"dt: {exc}") from None
        if not 0.0 < self.theta_max <= math.pi:
            raise InvalidConfigError(f"theta_max must be in (0, pi], got {self.theta_max}")

    @property
    def theta_max_deg(self) -> float:
        return math.degrees(self.theta_max)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        """Build a config from (possibly partial) nested dicts, e.g. parsed
        JSON. Unknown fields are rejected by name."""

        def build(section, factory, tuple_fields=()):
            raw = dict(data.get(section, {}))
            for key in tuple_fields:
                if key in raw and isinstance(raw[key], list):
                    raw[key] = tuple(raw[key])
            try:
                return factory(**raw)
            except TypeError as exc:
                raise InvalidConfigError(f"{section}: {exc}") from None

        known = {"stack", "layout", "motor", "catheter", "dt", "theta_max"}
        extra = set(data) - known
        if extra:
            raise InvalidConfigError(f"unknown config fields: {sorted(extra)}")
        cfg = cls(
            stack=build("stack", RingStackConfig),
            layout=build("layout", TendonLayout, tuple_fields=("angles",)),
            motor=build("motor", MotorConfig, tuple_fields=("pid_gains",)),
            catheter=build("catheter", CatheterSpec),
            dt=float(data.get("dt", 1e-3)),
            theta_max=float(data.get("theta_max", THETA_MAX_DEFAULT)),
        )
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {
            "stack": {
                "ring_count": self.stack.ring_count,
                "ring_outer_diameter": self.stack.ring_outer_diameter,
                "segment_arc_length": self.stack.segment_arc_length,
            },
            "layout": {
                "pitch_radius": self.layout.pitch_radius,
                "angles": list(self.layout.angles),
                "stroke_limit": self.layout.stroke_limit,
            },
            "motor": {
                "spool_radius": self.motor.spool_radius,
                "gear_ratio": self.motor.gear_ratio,
                "encoder_counts_per_motor_rev": self.motor.encoder_counts_per_motor_rev,
                "max_output_speed": self.motor.max_output_speed,
                "pid_gains": list(self.motor.pid_gains),
            },
            "catheter": {
                "catheter_diameter": self.catheter.catheter_diameter,
                "catheter_length": self.catheter.catheter_length,
                "tendon_wire_diameter": self.catheter.tendon_wire_diameter,
            },
            "dt": self.dt,
            "theta_max": self.theta_max,
        }


@dataclass(frozen=True)
class Waypoint:
    """One scripted command sample: time from script start (ms), bend angle
    and bend plane in degrees."""

    t_ms: float
    theta_deg: float
    phi_deg: float


def validate_waypoints(waypoints: list[Waypoint], theta_max_deg: float = 90.0) -> None:
    prev = -math.inf
    for idx, w in enumerate(waypoints):
        for name in ("t_ms", "theta_deg", "phi_deg"):
            v = getattr(w, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise BadScriptError(f"waypoint {idx}: {name} must be a finite number, got {v!r}")
        if w.t_ms < 0:
            raise BadScriptError(f"waypoint {idx}: t_ms must be >= 0, got {w.t_ms}")
        if w.t_ms < prev:
            raise BadScriptError(
                f"waypoint {idx}: t_ms {w.t_ms} decreases (previous was {prev})"
            )
        if not 0.0 <= w.theta_deg <= theta_max_deg + 1e-9:
            raise BadScriptError(
                f"waypoint {idx}: theta_deg must be in [0, {theta_max_deg:g}], got {w.theta_deg}"
            )
        prev = w.t_ms


@dataclass(frozen=True)
class TargetAck:
    """Result of accepting a bend target; clamped is set when the request
    exceeded theta_max and was clipped."""

    applied: BendCommand
    ramp_ms: float
    clamped: bool


@dataclass(frozen=True)
class JointSnapshot:
    """Full state after one step. Angles rad, lengths mm, time s."""

    t: float
    cmd: BendCommand
    achieved: BendCommand
    residual_mm: float
    dl_cmd: TendonDisplacements
    dl_act: TendonDisplacements
    motors: tuple[MotorState, MotorState, MotorState, MotorState]
    tip: Pose
    rings: tuple[Pose, ...] | None = None
    estopped: bool = False


@dataclass
class _Segment:
    """Active command ramp in step indices; phi advances by dphi along the
    shorter angular direction."""

    start_step: int
    end_step: int
    theta0: float
    phi0: float
    theta1: float
    dphi: float


def _shortest_delta(phi_from: float, phi_to: float) -> float:
    """Signed phi step from phi_from to phi_to in (-pi, pi]."""
    d = (phi_to - phi_from) % TWO_PI
    if d > math.pi:
        d -= TWO_PI
    return d


class _Trace:
    """Raw per-step arrays out of the kernel for one advance call."""

    __slots__ = (
        "t", "theta_cmd", "phi_cmd", "dl_cmd", "targets", "actual", "vel",
        "integ", "enc", "dl_act", "theta_act", "phi_act", "resid", "tip",
    )

    def __init__(self, n: int):
        self.t = np.empty(n)
        self.theta_cmd = np.empty(n)
        self.phi_cmd = np.empty(n)
        self.dl_cmd = np.empty((n, 4))
        self.targets = np.empty((n, 4))
        self.actual = np.empty((n, 4))
        self.vel = np.empty((n, 4))
        self.integ = np.empty((n, 4))
        self.enc = np.empty((n, 4))
        self.dl_act = np.empty((n, 4))
        self.theta_act = np.empty(n)
        self.phi_act = np.empty(n)
        self.resid = np.empty(n)
        self.tip = np.empty((n, 3))

    def __len__(self) -> int:
        return len(self.t)


class JointSim:
    """Single-owner stepped simulation of the four-tendon joint."""

    def __init__(self, config: SimConfig | None = None):
        self.config = config if config is not None else SimConfig()
        self.config.validate()
        self._beta = self.config.layout.angles_array()
        self._actual = np.zeros(4)
        self._integ = np.zeros(4)
        self._vel = np.zeros(4)
        self._steps = 0
        self._estopped = False
        self._frozen_targets = np.zeros(4)
        self._segment = _Segment(0, 0, 0.0, 0.0, 0.0, 0.0)

    # ------------------------------------------------------------------
    # state & commands

    @property
    def t(self) -> float:
        """Simulated time, s."""
        return self._steps * self.config.dt

    @property
    def estopped(self) -> bool:
        return self._estopped

    def command_at(self, step: int | None = None) -> BendCommand:
        """Commanded bend at a step index (default: now)."""
        s = self._steps if step is None else step
        seg = self._segment
        if seg.end_step <= seg.start_step or s >= seg.end_step:
            frac = 1.0
        elif s <= seg.start_step:
            frac = 0.0
        else:
            frac = (s - seg.start_step) / (seg.end_step - seg.start_step)
        theta = seg.theta0 + frac * (seg.theta1 - seg.theta0)
        phi = _kernels.wrap_angle(seg.phi0 + frac * seg.dphi)
        return BendCommand(float(theta), float(phi))

    def set_target(self, cmd: BendCommand, ramp_ms: float = 0.0) -> TargetAck:
        """Start a linear ramp from the current command to ``cmd``.

        Bend angles beyond theta_max are clamped and flagged in the ack.
        Raises EStopLatchedError while the e-stop latch is engaged.
        """
        if self._estopped:
            raise EStopLatchedError("e-stop latched; home() to reset before new targets")
        if ramp_ms < 0.0 or not math.isfinite(ramp_ms):
            raise InvalidConfigError(f"ramp_ms must be >= 0, got {ramp_ms}")
        clamped = cmd.theta > self.config.theta_max
        theta = min(cmd.theta, self.config.theta_max)
        applied = BendCommand(theta, cmd.phi)
        current = self.command_at()
        ramp_steps = int(round(ramp_ms / 1000.0 / self.config.dt))
        self._segment = _Segment(
            start_step=self._steps,
            end_step=self._steps + ramp_steps,
            theta0=current.theta,
            phi0=current.phi,
            theta1=applied.theta,
            dphi=_shortest_delta(current.phi, applied.phi),
        )
        return TargetAck(applied=applied, ramp_ms=ramp_ms, clamped=clamped)

    def set_target_degrees(self, theta_deg: float, phi_deg: float, ramp_ms: float = 0.0) -> TargetAck:
        if not (math.isfinite(theta_deg) and math.isfinite(phi_deg)):
            raise InvalidConfigError("theta_deg and phi_deg must be finite")
        theta = math.radians(theta_deg)
        outside = theta < 0.0 or theta > math.pi
        theta = min(max(theta, 0.0), math.pi)
        ack = self.set_target(BendCommand(theta, math.radians(phi_deg)), ramp_ms)
        if outside and not ack.clamped:
            ack = TargetAck(applied=ack.applied, ramp_ms=ack.ramp_ms, clamped=True)
        return ack

    def estop(self) -> None:
        """Freeze the motors where they are and latch out new targets.

        Spool targets are pinned to the current actual angles and the
        integrators are cleared, so the servo error is identically zero
        and nothing moves until home() releases the latch.
        """
        self._frozen_targets = self._actual.copy()
        self._integ[:] = 0.0
        self._vel[:] = 0.0
        self._estopped = True

    def home(self) -> None:
        """Zero all motor state, release the e-stop latch and command the
        straight configuration."""
        self._actual[:] = 0.0
        self._integ[:] = 0.0
        self._vel[:] = 0.0
        self._frozen_targets[:] = 0.0
        self._estopped = False
        self._segment = _Segment(self._steps, self._steps, 0.0, 0.0, 0.0, 0.0)

    # ------------------------------------------------------------------
    # stepping

    def _cmd_arrays(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        steps = np.arange(self._steps + 1, self._steps + n + 1, dtype=float)
        seg = self._segment
        if seg.end_step <= seg.start_step:
            frac = np.ones(n)
        else:
            frac = np.clip((steps - seg.start_step) / (seg.end_step - seg.start_step), 0.0, 1.0)
        theta = seg.theta0 + frac * (seg.theta1 - seg.theta0)
        phi = (seg.phi0 + frac * seg.dphi) % TWO_PI
        phi[phi >= TWO_PI] = 0.0
        return theta, phi

    def _advance(self, theta_cmd: np.ndarray, phi_cmd: np.ndarray) -> _Trace:
        n = len(theta_cmd)
        tr = _Trace(n)
        cfg = self.config
        kp, ki, kd = cfg.motor.pid_gains
        _kernels.run_steps(
            np.ascontiguousarray(theta_cmd),
            np.ascontiguousarray(phi_cmd),
            cfg.dt,
            self._actual,
            self._integ,
            self._vel,
            cfg.layout.pitch_radius,
            self._beta,
            cfg.motor.spool_radius,
            cfg.motor.counts_per_output_rev,
            kp,
            ki,
            kd,
            cfg.motor.max_output_speed,
            cfg.stack.segment_arc_length,
            self._estopped,
            self._frozen_targets,
            tr.theta_cmd,
            tr.phi_cmd,
            tr.dl_cmd,
            tr.targets,
            tr.actual,
            tr.vel,
            tr.integ,
            tr.enc,
            tr.dl_act,
            tr.theta_act,
            tr.phi_act,
            tr.resid,
            tr.tip,
        )
        tr.t[:] = (np.arange(self._steps + 1, self._steps + n + 1, dtype=float)) * cfg.dt
        self._steps += n
        return tr

    def _snapshot_from(self, tr: _Trace, k: int, include_rings: bool) -> JointSnapshot:
        motors = tuple(
            MotorState(
                target_angle=float(tr.targets[k, i]),
                actual_angle=float(tr.actual[k, i]),
                velocity=float(tr.vel[k, i]),
                encoder_count=int(tr.enc[k, i]),
                integrator=float(tr.integ[k, i]),
            )
            for i in range(4)
        )
        achieved = BendCommand(float(tr.theta_act[k]), float(tr.phi_act[k]))
        tip = Pose(tr.tip[k].copy(), bend_rotation(achieved.theta, achieved.phi))
        rings = None
        if include_rings:
            arc = ArcParams(achieved.theta, achieved.phi, self.config.stack.segment_arc_length)
            rings = tuple(fk_ring_poses(arc, self.config.stack))
        return JointSnapshot(
            t=float(tr.t[k]),
            cmd=BendCommand(float(tr.theta_cmd[k]), float(tr.phi_cmd[k])),
            achieved=achieved,
            residual_mm=float(tr.resid[k]),
            dl_cmd=TendonDisplacements(tr.dl_cmd[k].copy()),
            dl_act=TendonDisplacements(tr.dl_act[k].copy()),
            motors=motors,
            tip=tip,
            rings=rings,
            estopped=self._estopped,
        )

    def step(self, n: int = 1, include_rings: bool = False) -> JointSnapshot:
        """Advance n steps of the configured dt; returns the last snapshot."""
        if n < 1:
            raise InvalidConfigError(f"step count must be >= 1, got {n}")
        theta, phi = self._cmd_arrays(n)
        tr = self._advance(theta, phi)
        return self._snapshot_from(tr, n - 1, include_rings)

    def snapshot(self, include_rings: bool = False) -> JointSnapshot:
        """Snapshot of the current state without stepping."""
        cfg = self.config
        cmd = self.command_at()
        dl_cmd = np.empty(4)
        if self._estopped:
            dl_cmd[:] = self._frozen_targets * cfg.motor.spool_radius
            th_c, ph_c, _ = _kernels.deallocate4(dl_cmd, cfg.layout.pitch_radius)
            cmd = BendCommand(float(th_c), float(ph_c))
            targets = self._frozen_targets
        else:
            _kernels.allocate4(cmd.theta, cmd.phi, cfg.layout.pitch_radius, self._beta, dl_cmd)
            targets = dl_cmd / cfg.motor.spool_radius
        enc = np.array(
            [_kernels.encoder_counts(a, cfg.motor.counts_per_output_rev) for a in self._actual]
        )
        dl_act = enc / cfg.motor.counts_per_output_rev * TWO_PI * cfg.motor.spool_radius
        th, ph, resid = _kernels.deallocate4(dl_act, cfg.layout.pitch_radius)
        achieved = BendCommand(float(th), float(ph))
        x, y, z = _kernels.tip_position(achieved.theta, achieved.phi, cfg.stack.segment_arc_length)
        motors = tuple(
            MotorState(
                target_angle=float(targets[i]),
                actual_angle=float(self._actual[i]),
                velocity=float(self._vel[i]),
                encoder_count=int(enc[i]),
                integrator=float(self._integ[i]),
            )
            for i in range(4)
        )
        rings = None
        if include_rings:
            arc = ArcParams(achieved.theta, achieved.phi, cfg.stack.segment_arc_length)
            rings = tuple(fk_ring_poses(arc, cfg.stack))
        return JointSnapshot(
            t=self.t,
            cmd=cmd,
            achieved=achieved,
            residual_mm=float(resid),
            dl_cmd=TendonDisplacements(dl_cmd),
            dl_act=TendonDisplacements(dl_act),
            motors=motors,
            tip=Pose(np.array([x, y, z]), bend_rotation(achieved.theta, achieved.phi)),
            rings=rings,
            estopped=self._estopped,
        )

    def ring_poses(self) -> list[Pose]:
        """Ring poses of the current achieved bend."""
        snap = self.snapshot()
        arc = ArcParams(snap.achieved.theta, snap.achieved.phi, self.config.stack.segment_arc_length)
        return fk_ring_poses(arc, self.config.stack)

    # ------------------------------------------------------------------
    # scripts

    def _script_arrays(self, waypoints: list[Waypoint]) -> tuple[np.ndarray, np.ndarray]:
        """Per-step commanded (theta, phi) in rad for a waypoint script.

        Piecewise linear through the waypoints; phi is unwrapped along the
        shorter direction segment by segment (a full sweep therefore needs
        intermediate waypoints, e.g. every 45 degrees). If the script
        starts after t = 0 the current command is held until the first
        waypoint.
        """
        current = self.command_at()
        t_pts = [w.t_ms / 1000.0 for w in waypoints]
        theta_pts = [math.radians(w.theta_deg) for w in waypoints]
        phi_wrapped = [_kernels.wrap_angle(math.radians(w.phi_deg)) for w in waypoints]
        if t_pts[0] > 0.0:
            t_pts.insert(0, 0.0)
            theta_pts.insert(0, current.theta)
            phi_wrapped.insert(0, current.phi)
        phi_pts = [phi_wrapped[0]]
        for nxt in phi_wrapped[1:]:
            prev_wrapped = _kernels.wrap_angle(phi_pts[-1])
            phi_pts.append(phi_pts[-1] + _shortest_delta(prev_wrapped, nxt))
        n = int(round(t_pts[-1] / self.config.dt))
        ts = (np.arange(n, dtype=float) + 1.0) * self.config.dt
        theta = np.interp(ts, t_pts, theta_pts)
        phi = np.interp(ts, t_pts, phi_pts) % TWO_PI
        phi[phi >= TWO_PI] = 0.0
        return theta, phi

    def run_script(
        self,
        waypoints: list[Waypoint],
        include_rings: bool = False,
        realtime: bool = False,
    ) -> list[JointSnapshot]:
        """Run a waypoint script, one snapshot per step.

        ``realtime=True`` paces the loop against the wall clock in ~20 ms
        chunks; the step math and the returned trace are identical to the
        offline run (pacing never changes the chunk contents, only when
        they are computed).
        """
        if self._estopped:
            raise EStopLatchedError("e-stop latched; home() to reset before running scripts")
        validate_waypoints(waypoints, self.config.theta_max_deg)
        if not waypoints:
            return []
        theta, phi = self._script_arrays(waypoints)
        n = len(theta)
        snapshots: list[JointSnapshot] = []
        if n > 0:
            if realtime:
                chunk = max(1, int(round(0.02 / self.config.dt)))
                wall0 = time.perf_counter()
                done = 0
                while done < n:
                    m = min(chunk, n - done)
                    tr = self._advance(theta[done : done + m], phi[done : done + m])
                    snapshots.extend(self._snapshot_from(tr, k, include_rings) for k in range(m))
                    done += m
                    lead = wall0 + done * self.config.dt - time.perf_counter()
                    if lead > 0:
                        time.sleep(lead)
            else:
                tr = self._advance(theta, phi)
                snapshots.extend(self._snapshot_from(tr, k, include_rings) for k in range(n))
        # hold the script's final command from here on
        final = waypoints[-1]
        self._segment = _Segment(
            self._steps,
            self._steps,
            math.radians(final.theta_deg),
            _kernels.wrap_angle(math.radians(final.phi_deg)),
            math.radians(final.theta_deg),
            0.0,
        )
        return snapshots
