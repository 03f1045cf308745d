"""Command-line harness.

Subcommands:
    run    SCRIPT OUT.CSV [--config CFG]   offline script run -> CSV trace
    fk     --theta --phi --len             tip position, JSON to stdout
    ik     --x --y --z --len               arc parameters, JSON to stdout
    alloc  --theta --phi                   tendon displacements, JSON
    serve  [--port --bind --rate-hz --config]   teleoperation service

Angles are degrees everywhere on the CLI and in CSV traces; lengths mm.
Exit codes: 0 success, 2 bad script/arguments, 3 bad config.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

from .errors import (
    BadScriptError,
    DegenerateTargetError,
    InvalidArcError,
    InvalidConfigError,
    StrokeLimitError,
    UnreachableTargetError,
)
from .kinematics import ArcParams, fk_tip, ik_tip
from .sim import JointSim, JointSnapshot, SimConfig, Waypoint
from .tendon import BendCommand, TendonLayout, allocate
from .teleop import DEFAULT_PORT, DEFAULT_RATE_HZ, run_server

CSV_COLUMNS = (
    "t",
    "theta_cmd",
    "phi_cmd",
    "theta_act",
    "phi_act",
    "residual_mm",
    "dl_cmd_0",
    "dl_cmd_1",
    "dl_cmd_2",
    "dl_cmd_3",
    "dl_act_0",
    "dl_act_1",
    "dl_act_2",
    "dl_act_3",
    "motor_angle_0",
    "motor_angle_1",
    "motor_angle_2",
    "motor_angle_3",
    "tip_x",
    "tip_y",
    "tip_z",
)


def scripts_dir() -> Path:
    """Directory holding the bundled fig2a/fig2b/fig2c example scripts."""
    return Path(str(resources.files("tjsim").joinpath("scripts")))


def load_script(path: str | Path) -> list[Waypoint]:
    """Parse a waypoint script: JSON array of {t_ms, theta_deg, phi_deg}."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BadScriptError(f"cannot read script {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadScriptError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, list):
        raise BadScriptError(f"{path}: script must be a JSON array of waypoints")
    waypoints = []
    for idx, entry in enumerate(data):
        if not isinstance(entry, dict):
            raise BadScriptError(f"{path}: waypoint {idx} must be an object")
        fields = {}
        for name in ("t_ms", "theta_deg", "phi_deg"):
            if name not in entry:
                raise BadScriptError(f"{path}: waypoint {idx} is missing '{name}'")
            value = entry[name]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise BadScriptError(f"{path}: waypoint {idx}: '{name}' must be a number")
            fields[name] = float(value)
        unknown = set(entry) - {"t_ms", "theta_deg", "phi_deg"}
        if unknown:
            raise BadScriptError(f"{path}: waypoint {idx} has unknown fields {sorted(unknown)}")
        waypoints.append(Waypoint(**fields))
    return waypoints


def load_config(path: str | Path | None) -> SimConfig:
    if path is None:
        return SimConfig()
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InvalidConfigError(f"{path}: config must be a JSON object")
    return SimConfig.from_dict(data)


def csv_row(snap: JointSnapshot) -> str:
    values = [
        snap.t,
        math.degrees(snap.cmd.theta),
        math.degrees(snap.cmd.phi),
        math.degrees(snap.achieved.theta),
        math.degrees(snap.achieved.phi),
        snap.residual_mm,
        *snap.dl_cmd.dl,
        *snap.dl_act.dl,
        *(m.actual_angle for m in snap.motors),
        *snap.tip.position,
    ]
    return ",".join(f"{v:.9g}" for v in values)


def write_trace_csv(snapshots: list[JointSnapshot], fh) -> None:
    fh.write(",".join(CSV_COLUMNS) + "\n")
    for snap in snapshots:
        fh.write(csv_row(snap) + "\n")


def _round(v: float, places: int = 5) -> float:
    r = round(float(v), places)
    return 0.0 if r == 0.0 else r


def _print_json(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, separators=(",", ":")) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    config = load_config(args.config)
    waypoints = load_script(args.script)
    sim = JointSim(config)
    trace = sim.run_script(waypoints)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        write_trace_csv(trace, fh)
    print(f"wrote {len(trace)} rows to {args.out}")
    return 0


def cmd_fk(args) -> int:
    arc = ArcParams(math.radians(args.theta), math.radians(args.phi), args.len)
    pos = fk_tip(arc).position
    _print_json({"x": _round(pos[0]), "y": _round(pos[1]), "z": _round(pos[2])})
    return 0


def cmd_ik(args) -> int:
    arc, residual = ik_tip((args.x, args.y, args.z), args.len, math.radians(args.theta_max))
    _print_json(
        {
            "theta_deg": _round(math.degrees(arc.theta)),
            "phi_deg": _round(math.degrees(arc.phi)),
            "residual_mm": _round(residual),
        }
    )
    return 0


def cmd_alloc(args) -> int:
    layout = load_config(args.config).layout if args.config else TendonLayout()
    theta = math.radians(args.theta)
    if not 0.0 <= theta <= math.pi / 2:
        raise InvalidArcError(f"--theta must be in [0, 90] degrees, got {args.theta}")
    dl = allocate(BendCommand(theta, math.radians(args.phi)), layout)
    _print_json({"dl": [_round(v) for v in dl.dl]})
    return 0


def cmd_serve(args) -> int:
    config = load_config(args.config)
    port = args.port
    if port is None:
        port = int(os.environ.get("TJS_PORT", DEFAULT_PORT))
    print(f"serving on ws://{args.bind}:{port} at {args.rate_hz:g} Hz (Ctrl-C to stop)")
    try:
        asyncio.run(run_server(config, args.bind, port, args.rate_hz))
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tjsim",
        description="Tendon-driven bending joint simulator: scripted traces, "
        "kinematics queries and the teleoperation service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a waypoint script offline and write a CSV trace")
    p_run.add_argument("script", help="waypoint script (JSON array of {t_ms, theta_deg, phi_deg})")
    p_run.add_argument("out", help="output CSV path")
    p_run.add_argument("--config", help="SimConfig JSON file", default=None)
    p_run.set_defaults(func=cmd_run)

    p_fk = sub.add_parser("fk", help="tip position for a bend (degrees, mm)")
    p_fk.add_argument("--theta", type=float, required=True)
    p_fk.add_argument("--phi", type=float, required=True)
    p_fk.add_argument("--len", type=float, required=True)
    p_fk.set_defaults(func=cmd_fk)

    p_ik = sub.add_parser("ik", help="arc parameters reaching a tip position (mm)")
    p_ik.add_argument("--x", type=float, required=True)
    p_ik.add_argument("--y", type=float, required=True)
    p_ik.add_argument("--z", type=float, required=True)
    p_ik.add_argument("--len", type=float, required=True)
    p_ik.add_argument("--theta-max", type=float, default=90.0, dest="theta_max")
    p_ik.set_defaults(func=cmd_ik)

    p_alloc = sub.add_parser("alloc", help="tendon displacements for a bend (degrees)")
    p_alloc.add_argument("--theta", type=float, required=True)
    p_alloc.add_argument("--phi", type=float, required=True)
    p_alloc.add_argument("--config", help="SimConfig JSON file (for a custom layout)", default=None)
    p_alloc.set_defaults(func=cmd_alloc)

    p_serve = sub.add_parser("serve", help="run the teleoperation WebSocket service")
    p_serve.add_argument("--port", type=int, default=None, help=f"default {DEFAULT_PORT} or $TJS_PORT")
    p_serve.add_argument("--bind", default="127.0.0.1")
    p_serve.add_argument("--rate-hz", type=float, default=DEFAULT_RATE_HZ, dest="rate_hz")
    p_serve.add_argument("--config", help="SimConfig JSON file", default=None)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BadScriptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InvalidArcError, UnreachableTargetError, DegenerateTargetError, StrokeLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
