"""Teleoperation front door: WebSocket command/state protocol.

Clients exchange newline-free JSON text frames. Client messages are
``set_target``, ``home``, ``estop`` and ``stream_config``; the server
answers every one with exactly one ``ack`` or ``error`` and broadcasts
``state`` frames (the joint snapshot minus the ring list) at the
configured rate to all connected clients. Angles cross the wire in
degrees, durations in milliseconds, field names in snake_case.

One asyncio task owns the simulation and steps it against the wall
clock; client handlers never touch it directly - commands travel through
an ordered queue (last writer wins). If the loop falls behind it steps
multiple dt and emission frames are skipped, never simulation steps.
"""

from __future__ import annotations

import asyncio
import json
import math
import time
from dataclasses import asdict, dataclass

from websockets.asyncio.server import broadcast, serve

from .errors import EStopLatchedError, InvalidConfigError, ProtocolError
from .sim import JointSim, JointSnapshot, SimConfig

DEFAULT_PORT = 8080
DEFAULT_RATE_HZ = 50.0


# ---------------------------------------------------------------------------
# message types


@dataclass(frozen=True)
class SetTarget:
    theta_deg: float
    phi_deg: float
    ramp_ms: float = 0.0


@dataclass(frozen=True)
class Home:
    pass


@dataclass(frozen=True)
class EStop:
    pass


@dataclass(frozen=True)
class StreamConfig:
    rate_hz: float


@dataclass(frozen=True)
class Ack:
    for_: str
    clamped: bool = False


@dataclass(frozen=True)
class Error:
    code: str
    detail: str


@dataclass(frozen=True)
class State:
    t: float
    theta_cmd_deg: float
    phi_cmd_deg: float
    theta_act_deg: float
    phi_act_deg: float
    residual_mm: float
    dl_cmd_mm: tuple[float, float, float, float]
    dl_act_mm: tuple[float, float, float, float]
    motor_target_rad: tuple[float, float, float, float]
    motor_angle_rad: tuple[float, float, float, float]
    motor_velocity_rad_s: tuple[float, float, float, float]
    encoder_counts: tuple[int, int, int, int]
    tip_mm: tuple[float, float, float]
    estop: bool


TeleopMessage = SetTarget | Home | EStop | StreamConfig | Ack | Error | State

_TAGS = {
    SetTarget: "set_target",
    Home: "home",
    EStop: "estop",
    StreamConfig: "stream_config",
    Ack: "ack",
    Error: "error",
    State: "state",
}
_TYPES = {tag: cls for cls, tag in _TAGS.items()}


def state_from_snapshot(snap: JointSnapshot) -> State:
    return State(
        t=snap.t,
        theta_cmd_deg=math.degrees(snap.cmd.theta),
        phi_cmd_deg=math.degrees(snap.cmd.phi),
        theta_act_deg=math.degrees(snap.achieved.theta),
        phi_act_deg=math.degrees(snap.achieved.phi),
        residual_mm=snap.residual_mm,
        dl_cmd_mm=tuple(float(v) for v in snap.dl_cmd.dl),
        dl_act_mm=tuple(float(v) for v in snap.dl_act.dl),
        motor_target_rad=tuple(m.target_angle for m in snap.motors),
        motor_angle_rad=tuple(m.actual_angle for m in snap.motors),
        motor_velocity_rad_s=tuple(m.velocity for m in snap.motors),
        encoder_counts=tuple(m.encoder_count for m in snap.motors),
        tip_mm=tuple(float(v) for v in snap.tip.position),
        estop=snap.estopped,
    )


def encode(msg: TeleopMessage) -> str:
    """Message -> one-line JSON text frame."""
    try:
        tag = _TAGS[type(msg)]
    except KeyError:
        raise ProtocolError("bad-frame", f"not a teleop message: {type(msg).__name__}") from None
    payload = {"type": tag}
    for key, value in asdict(msg).items():
        payload[key.rstrip("_")] = list(value) if isinstance(value, tuple) else value
    return json.dumps(payload, separators=(",", ":"))


def _need(data: dict, key: str, kinds, tag: str):
    if key not in data:
        raise ProtocolError("bad-field", f"{tag} is missing '{key}'")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, kinds):
        raise ProtocolError("bad-field", f"{tag}.{key} has the wrong type")
    if isinstance(value, (int, float)) and not math.isfinite(value):
        raise ProtocolError("bad-field", f"{tag}.{key} must be finite")
    return value


def _quad(data: dict, key: str, tag: str, cast=float):
    raw = _need(data, key, list, tag)
    if len(raw) != 4 or not all(isinstance(v, (int, float)) for v in raw):
        raise ProtocolError("bad-field", f"{tag}.{key} must be a list of 4 numbers")
    return tuple(cast(v) for v in raw)


def decode(text: str | bytes) -> TeleopMessage:
    """JSON text frame -> message. Raises ProtocolError on anything that is
    not a well-formed frame (code carries the reason, detail the position)."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProtocolError("bad-frame", f"not UTF-8: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError("bad-frame", f"invalid JSON at position {exc.pos}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ProtocolError("bad-frame", "frame must be a JSON object")
    tag = data.get("type")
    if not isinstance(tag, str):
        raise ProtocolError("bad-frame", "missing 'type' field")
    if tag not in _TYPES:
        raise ProtocolError("unknown-type", f"unknown message type {tag!r}")

    if tag == "set_target":
        return SetTarget(
            theta_deg=float(_need(data, "theta_deg", (int, float), tag)),
            phi_deg=float(_need(data, "phi_deg", (int, float), tag)),
            ramp_ms=float(data.get("ramp_ms", 0.0)),
        )
    if tag == "home":
        return Home()
    if tag == "estop":
        return EStop()
    if tag == "stream_config":
        rate = float(_need(data, "rate_hz", (int, float), tag))
        return StreamConfig(rate_hz=rate)
    if tag == "ack":
        return Ack(
            for_=str(_need(data, "for", str, tag)),
            clamped=bool(data.get("clamped", False)),
        )
    if tag == "error":
        return Error(
            code=str(_need(data, "code", str, tag)),
            detail=str(_need(data, "detail", str, tag)),
        )
    tip_raw = _need(data, "tip_mm", list, tag)
    if len(tip_raw) != 3 or not all(isinstance(v, (int, float)) for v in tip_raw):
        raise ProtocolError("bad-field", f"{tag}.tip_mm must be a list of 3 numbers")
    return State(
        t=float(_need(data, "t", (int, float), tag)),
        theta_cmd_deg=float(_need(data, "theta_cmd_deg", (int, float), tag)),
        phi_cmd_deg=float(_need(data, "phi_cmd_deg", (int, float), tag)),
        theta_act_deg=float(_need(data, "theta_act_deg", (int, float), tag)),
        phi_act_deg=float(_need(data, "phi_act_deg", (int, float), tag)),
        residual_mm=float(_need(data, "residual_mm", (int, float), tag)),
        dl_cmd_mm=_quad(data, "dl_cmd_mm", tag),
        dl_act_mm=_quad(data, "dl_act_mm", tag),
        motor_target_rad=_quad(data, "motor_target_rad", tag),
        motor_angle_rad=_quad(data, "motor_angle_rad", tag),
        motor_velocity_rad_s=_quad(data, "motor_velocity_rad_s", tag),
        encoder_counts=_quad(data, "encoder_counts", tag, cast=int),
        tip_mm=(float(tip_raw[0]), float(tip_raw[1]), float(tip_raw[2])),
        estop=bool(data.get("estop", False)),
    )


# ---------------------------------------------------------------------------
# server


class TeleopServer:
    """Runs the simulation in real time and serves the teleop protocol."""

    # never step more than this many dt in one catch-up burst
    MAX_CATCHUP_STEPS = 20_000

    def __init__(
        self,
        config: SimConfig | None = None,
        bind: str = "127.0.0.1",
        port: int = DEFAULT_PORT,
        rate_hz: float = DEFAULT_RATE_HZ,
    ):
        if rate_hz <= 0.0:
            raise InvalidConfigError(f"rate_hz must be > 0, got {rate_hz}")
        self.sim = JointSim(config)
        self.bind = bind
        self.requested_port = port
        self.rate_hz = rate_hz
        self._server = None
        self._loop_task: asyncio.Task | None = None
        self._clients: set = set()
        self._commands: asyncio.Queue = asyncio.Queue()
        self._steps_done = 0
        self._running = False

    @property
    def port(self) -> int:
        if self._server is None:
            return self.requested_port
        return self._server.sockets[0].getsockname()[1]

    async def start(self) -> None:
        self._server = await serve(self._handle_client, self.bind, self.requested_port)
        self._running = True
        self._loop_task = asyncio.create_task(self._run_loop())

    async def stop(self) -> None:
        self._running = False
        if self._loop_task is not None:
            self._loop_task.cancel()
            try:
                await self._loop_task
            except asyncio.CancelledError:
                pass
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def serve_forever(self) -> None:
        await self.start()
        try:
            await asyncio.get_running_loop().create_future()
        except asyncio.CancelledError:
            pass
        finally:
            await self.stop()

    # -- client side -------------------------------------------------------

    async def _handle_client(self, ws) -> None:
        self._clients.add(ws)
        try:
            async for raw in ws:
                try:
                    msg = decode(raw)
                except ProtocolError as exc:
                    await self._safe_send(ws, encode(Error(exc.code, exc.detail)))
                    continue
                if not isinstance(msg, (SetTarget, Home, EStop, StreamConfig)):
                    await self._safe_send(
                        ws, encode(Error("bad-frame", f"{_TAGS[type(msg)]} is not a client message"))
                    )
                    continue
                await self._commands.put((msg, ws))
        finally:
            self._clients.discard(ws)

    @staticmethod
    async def _safe_send(ws, text: str) -> None:
        try:
            await ws.send(text)
        except Exception:
            pass  # client went away; its handler cleans up

    # -- simulation loop ----------------------------------------------------

    def _apply(self, msg) -> TeleopMessage:
        if isinstance(msg, SetTarget):
            try:
                ack = self.sim.set_target_degrees(msg.theta_deg, msg.phi_deg, msg.ramp_ms)
            except EStopLatchedError as exc:
                return Error("estop-latched", str(exc))
            except InvalidConfigError as exc:
                return Error("bad-field", str(exc))
            return Ack("set_target", clamped=ack.clamped)
        if isinstance(msg, Home):
            self.sim.home()
            return Ack("home")
        if isinstance(msg, EStop):
            self.sim.estop()
            return Ack("estop")
        if msg.rate_hz <= 0.0 or msg.rate_hz > 1000.0:
            return Error("bad-field", f"rate_hz must be in (0, 1000], got {msg.rate_hz}")
        self.rate_hz = msg.rate_hz
        return Ack("stream_config")

    async def _run_loop(self) -> None:
        dt = self.sim.config.dt
        wall0 = time.perf_counter()
        next_emit = wall0
        while self._running:
            now = time.perf_counter()
            if next_emit > now:
                await asyncio.sleep(next_emit - now)
                now = time.perf_counter()
            while not self._commands.empty():
                msg, ws = self._commands.get_nowait()
                reply = self._apply(msg)
                asyncio.ensure_future(self._safe_send(ws, encode(reply)))
            target_steps = int((now - wall0) / dt)
            n = min(target_steps - self._steps_done, self.MAX_CATCHUP_STEPS)
            if n > 0:
                snap = self.sim.step(n)
                self._steps_done += n
            else:
                snap = self.sim.snapshot()
            broadcast(self._clients, encode(state_from_snapshot(snap)))
            period = 1.0 / self.rate_hz
            next_emit += period
            if next_emit < now:  # fell behind: drop emission frames, keep stepping
                next_emit = now + period


async def run_server(
    config: SimConfig | None = None,
    bind: str = "127.0.0.1",
    port: int = DEFAULT_PORT,
    rate_hz: float = DEFAULT_RATE_HZ,
) -> None:
    server = TeleopServer(config, bind, port, rate_hz)
    await server.serve_forever()
