#!/usr/bin/env python3
"""Benchmark the hot stepping kernel: numba JIT vs pure-Python fallback.

The workload is the full per-step pipeline (tendon allocation, four servo
updates, encoder quantization, bend decode, tip evaluation) driven through
JointSim, i.e. exactly what scripted runs and the teleop service execute.

Run without arguments to measure the active mode and the opposite mode (in
a subprocess with TJSIM_NUMBA flipped) and print the comparison:

    python benchmarks/bench_kernels.py
"""

import argparse
import json
import os
import subprocess
import sys
import time

from tjsim import JointSim
from tjsim._accel import NUMBA_ENABLED

STEPS = 200_000


def bench_steps(n_steps: int = STEPS) -> float:
    sim = JointSim()
    sim.set_target_degrees(90.0, 45.0, ramp_ms=500)
    sim.step(100)  # warm up (JIT compile / cache load)
    t0 = time.perf_counter()
    done = 0
    while done < n_steps:
        chunk = min(20_000, n_steps - done)
        sim.step(chunk)
        done += chunk
        if sim.t > 3.0:
            sim.home()
            sim.set_target_degrees(90.0, 45.0, ramp_ms=500)
    elapsed = time.perf_counter() - t0
    return n_steps / elapsed


def mode_name(numba_on: bool) -> str:
    return "numba @njit" if numba_on else "pure numpy "


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--inner", action="store_true", help="emit one JSON measurement and exit")
    parser.add_argument("--steps", type=int, default=STEPS)
    args = parser.parse_args()

    rate = bench_steps(args.steps)
    if args.inner:
        print(json.dumps({"numba": NUMBA_ENABLED, "steps_per_s": rate}))
        return 0

    results = {NUMBA_ENABLED: rate}
    env = os.environ.copy()
    env["TJSIM_NUMBA"] = "0" if NUMBA_ENABLED else "1"
    proc = subprocess.run(
        [sys.executable, __file__, "--inner", "--steps", str(args.steps)],
        env=env,
        capture_output=True,
        text=True,
    )
    if proc.returncode == 0:
        other = json.loads(proc.stdout.strip().splitlines()[-1])
        results[other["numba"]] = other["steps_per_s"]
    else:
        print(f"(could not run the other mode: {proc.stderr.strip()})", file=sys.stderr)

    print(f"stepping pipeline, {args.steps} steps at dt=1 ms (sim time {args.steps / 1000:.0f} s):")
    for numba_on in (True, False):
        if numba_on in results:
            print(f"  {mode_name(numba_on)} : {results[numba_on]:>12,.0f} steps/s")
    if True in results and False in results:
        print(f"  speedup     : {results[True] / results[False]:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
