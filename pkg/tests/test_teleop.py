import asyncio
import json

import pytest
from websockets.asyncio.client import connect

from tjsim import JointSim, ProtocolError
from tjsim.teleop import (
    Ack,
    EStop,
    Error,
    Home,
    SetTarget,
    State,
    StreamConfig,
    TeleopServer,
    decode,
    encode,
    state_from_snapshot,
)


def run(coro):
    return asyncio.run(asyncio.wait_for(coro, timeout=30.0))


def sample_state():
    sim = JointSim()
    sim.set_target_degrees(35.0, 10.0, ramp_ms=100)
    return state_from_snapshot(sim.step(400))


ALL_VARIANTS = [
    SetTarget(theta_deg=90.0, phi_deg=0.0, ramp_ms=500.0),
    SetTarget(theta_deg=12.5, phi_deg=271.25, ramp_ms=0.0),
    Home(),
    EStop(),
    StreamConfig(rate_hz=25.0),
    Ack(for_="set_target", clamped=True),
    Ack(for_="home", clamped=False),
    Error(code="bad-frame", detail="invalid JSON at position 0: Expecting value"),
]


# ---------------------------------------------------------------------------
# codec


@pytest.mark.parametrize("msg", ALL_VARIANTS, ids=lambda m: type(m).__name__)
def test_round_trip_identity(msg):
    assert decode(encode(msg)) == msg


def test_round_trip_state_frame():
    state = sample_state()
    assert decode(encode(state)) == state


def test_encoded_frames_are_single_line_json():
    for msg in ALL_VARIANTS + [sample_state()]:
        text = encode(msg)
        assert "\n" not in text
        assert json.loads(text)["type"]


def test_set_target_wire_format_is_normative():
    data = json.loads(encode(SetTarget(theta_deg=90, phi_deg=0, ramp_ms=500)))
    assert data == {"type": "set_target", "theta_deg": 90, "phi_deg": 0, "ramp_ms": 500}


def test_ack_uses_for_key():
    assert json.loads(encode(Ack(for_="estop")))["for"] == "estop"


def test_decode_unknown_type():
    with pytest.raises(ProtocolError) as err:
        decode('{"type":"warp"}')
    assert err.value.code == "unknown-type"


def test_decode_bad_json_reports_position():
    with pytest.raises(ProtocolError) as err:
        decode('{"type": "set_target", theta}')
    assert err.value.code == "bad-frame"
    assert "position" in err.value.detail


def test_decode_missing_and_malformed_fields():
    with pytest.raises(ProtocolError) as err:
        decode('{"type":"set_target","phi_deg":0}')
    assert err.value.code == "bad-field"
    with pytest.raises(ProtocolError):
        decode('{"type":"set_target","theta_deg":"big","phi_deg":0}')
    with pytest.raises(ProtocolError):
        decode('{"type":"set_target","theta_deg":NaN,"phi_deg":0}')
    with pytest.raises(ProtocolError):
        decode("[1,2,3]")
    with pytest.raises(ProtocolError):
        decode('{"theta_deg":1}')


# ---------------------------------------------------------------------------
# server scenarios


async def start_server(rate_hz=50.0):
    server = TeleopServer(port=0, rate_hz=rate_hz)
    await server.start()
    return server, f"ws://127.0.0.1:{server.port}"


async def collect_states(ws, n):
    states = []
    while len(states) < n:
        msg = decode(await ws.recv())
        if isinstance(msg, State):
            states.append(msg)
    return states


async def next_non_state(ws):
    while True:
        msg = decode(await ws.recv())
        if not isinstance(msg, State):
            return msg


def test_set_target_acked_and_converges():
    async def scenario():
        server, url = await start_server()
        try:
            async with connect(url) as ws:
                await ws.send(encode(SetTarget(theta_deg=90.0, phi_deg=0.0, ramp_ms=500.0)))
                reply = await next_non_state(ws)
                assert reply == Ack(for_="set_target", clamped=False)
                # stream shows theta converging toward 90 within ~1.5 s
                deadline = asyncio.get_running_loop().time() + 10.0
                while True:
                    msg = decode(await ws.recv())
                    if isinstance(msg, State) and abs(msg.theta_act_deg - 90.0) < 0.5:
                        break
                    assert asyncio.get_running_loop().time() < deadline
        finally:
            await server.stop()

    run(scenario())


def test_command_reflected_within_two_frames():
    async def scenario():
        server, url = await start_server()
        try:
            async with connect(url) as ws:
                await collect_states(ws, 2)  # stream is live
                await ws.send(encode(SetTarget(theta_deg=40.0, phi_deg=10.0, ramp_ms=0.0)))
                frames = 0
                while True:
                    msg = decode(await ws.recv())
                    if not isinstance(msg, State):
                        continue
                    frames += 1
                    if abs(msg.theta_cmd_deg - 40.0) < 1e-9:
                        break
                    assert frames <= 2, "command not reflected within 2 state frames"
        finally:
            await server.stop()

    run(scenario())


def test_stream_rate_within_tolerance():
    async def scenario():
        server, url = await start_server(rate_hz=50.0)
        try:
            async with connect(url) as ws:
                await collect_states(ws, 3)  # warm up
                loop = asyncio.get_running_loop()
                t0 = loop.time()
                await collect_states(ws, 50)
                elapsed = loop.time() - t0
                rate = 50 / elapsed
                assert 0.8 * 50.0 <= rate <= 1.2 * 50.0
        finally:
            await server.stop()

    run(scenario())


def test_stream_config_changes_rate():
    async def scenario():
        server, url = await start_server(rate_hz=50.0)
        try:
            async with connect(url) as ws:
                await ws.send(encode(StreamConfig(rate_hz=100.0)))
                assert (await next_non_state(ws)) == Ack(for_="stream_config", clamped=False)
                await collect_states(ws, 3)
                loop = asyncio.get_running_loop()
                t0 = loop.time()
                await collect_states(ws, 60)
                rate = 60 / (loop.time() - t0)
                assert 80.0 <= rate <= 120.0
        finally:
            await server.stop()

    run(scenario())


def test_state_time_monotone_and_clamped_flagged():
    async def scenario():
        server, url = await start_server()
        try:
            async with connect(url) as ws:
                await ws.send(encode(SetTarget(theta_deg=120.0, phi_deg=0.0, ramp_ms=0.0)))
                assert (await next_non_state(ws)) == Ack(for_="set_target", clamped=True)
                states = await collect_states(ws, 100)
                ts = [s.t for s in states]
                assert all(b > a for a, b in zip(ts, ts[1:]))
        finally:
            await server.stop()

    run(scenario())


def test_malformed_frame_keeps_connection_alive():
    async def scenario():
        server, url = await start_server()
        try:
            async with connect(url) as ws:
                await ws.send("{this is not json")
                reply = await next_non_state(ws)
                assert isinstance(reply, Error) and reply.code == "bad-frame"
                await ws.send(encode(SetTarget(theta_deg=10.0, phi_deg=0.0)))
                assert (await next_non_state(ws)) == Ack(for_="set_target", clamped=False)
                await ws.send('{"type":"warp"}')
                reply = await next_non_state(ws)
                assert isinstance(reply, Error) and reply.code == "unknown-type"
                await ws.send(encode(Ack(for_="state")))  # server-only message
                reply = await next_non_state(ws)
                assert isinstance(reply, Error) and reply.code == "bad-frame"
        finally:
            await server.stop()

    run(scenario())


def test_estop_latch_freezes_commands_until_home():
    async def scenario():
        server, url = await start_server(rate_hz=100.0)
        try:
            async with connect(url) as ws:
                await ws.send(encode(SetTarget(theta_deg=60.0, phi_deg=45.0, ramp_ms=400.0)))
                assert (await next_non_state(ws)) == Ack(for_="set_target", clamped=False)
                await collect_states(ws, 20)  # mid-motion
                await ws.send(encode(EStop()))
                assert (await next_non_state(ws)) == Ack(for_="estop", clamped=False)
                states = await collect_states(ws, 110)
                frozen = [s for s in states if s.estop]
                assert len(frozen) >= 100
                reference = frozen[10]
                for s in frozen[10:]:
                    assert s.dl_cmd_mm == reference.dl_cmd_mm
                    assert s.motor_angle_rad == reference.motor_angle_rad
                # new targets refused while latched
                await ws.send(encode(SetTarget(theta_deg=10.0, phi_deg=0.0)))
                reply = await next_non_state(ws)
                assert isinstance(reply, Error) and reply.code == "estop-latched"
                # home releases the latch
                await ws.send(encode(Home()))
                assert (await next_non_state(ws)) == Ack(for_="home", clamped=False)
                await ws.send(encode(SetTarget(theta_deg=10.0, phi_deg=0.0)))
                assert (await next_non_state(ws)) == Ack(for_="set_target", clamped=False)
        finally:
            await server.stop()

    run(scenario())


def test_two_clients_see_identical_stream():
    async def scenario():
        server, url = await start_server()
        try:
            async with connect(url) as ws_a, connect(url) as ws_b:
                await ws_a.send(encode(SetTarget(theta_deg=30.0, phi_deg=90.0, ramp_ms=100.0)))
                await next_non_state(ws_a)

                async def take(ws, n=40):
                    out = {}
                    while len(out) < n:
                        raw = await ws.recv()
                        msg = decode(raw)
                        if isinstance(msg, State):
                            out[msg.t] = raw
                    return out

                got_a, got_b = await asyncio.gather(take(ws_a), take(ws_b))
                shared = sorted(set(got_a) & set(got_b))
                assert len(shared) >= 20
                for t in shared:
                    assert got_a[t] == got_b[t]
        finally:
            await server.stop()

    run(scenario())


def test_last_writer_wins():
    async def scenario():
        server, url = await start_server()
        try:
            async with connect(url) as ws_a, connect(url) as ws_b:
                await ws_a.send(encode(SetTarget(theta_deg=80.0, phi_deg=0.0, ramp_ms=0.0)))
                await next_non_state(ws_a)
                await ws_b.send(encode(SetTarget(theta_deg=20.0, phi_deg=180.0, ramp_ms=0.0)))
                await next_non_state(ws_b)
                states = await collect_states(ws_a, 3)
                assert abs(states[-1].theta_cmd_deg - 20.0) < 1e-9
        finally:
            await server.stop()

    run(scenario())
