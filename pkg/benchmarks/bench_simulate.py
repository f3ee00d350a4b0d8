#!/usr/bin/env python3
"""Benchmark the path-evolution kernel with and without numba.

Each backend runs in its own interpreter so that SU2LEVY_DISABLE_NUMBA is
honoured at import time. Terminal quaternions from both runs are compared.

    python benchmarks/bench_simulate.py [--paths N] [--t T] [--dt DT]
"""

import argparse
import json
import os
import subprocess
import sys
import tempfile

import numpy as np

WORKER = r"""
import json, sys, time
import numpy as np
from su2levy import _accel, _kernels
from su2levy.generator import ClassJump, GeneratorSpec, LevyAtom, LevyMeasure
from su2levy.simulate import PathConfig, simulate_terminal

paths, t, dt, out = int(sys.argv[1]), float(sys.argv[2]), float(sys.argv[3]), sys.argv[4]
c = 32 * np.pi ** 2
spec = GeneratorSpec.heat(c, LevyMeasure([LevyAtom(2.0, ClassJump(0.2))]))
cfg = PathConfig(t, dt, paths, master_seed=0)
simulate_terminal(spec, PathConfig(t, dt, 16, 0))  # warm up (jit compile)

kernel_time = 0.0
evolve = _kernels.evolve


def timed_evolve(*args, **kwargs):
    global kernel_time
    t0 = time.perf_counter()
    res = evolve(*args, **kwargs)
    kernel_time += time.perf_counter() - t0
    return res


_kernels.evolve = timed_evolve
start = time.perf_counter()
s = simulate_terminal(spec, cfg)
elapsed = time.perf_counter() - start
np.save(out, s.quaternions)
print(json.dumps({"backend": _accel.backend_name(), "seconds": elapsed, "kernel": kernel_time}))
"""


def run(paths, t, dt, disable, out):
    env = dict(os.environ)
    if disable:
        env["SU2LEVY_DISABLE_NUMBA"] = "1"
    else:
        env.pop("SU2LEVY_DISABLE_NUMBA", None)
    res = subprocess.run([sys.executable, "-c", WORKER, str(paths), str(t), str(dt), out],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=20000)
    ap.add_argument("--t", type=float, default=0.3)
    ap.add_argument("--dt", type=float, default=1e-3)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        fast_out, slow_out = os.path.join(tmp, "numba.npy"), os.path.join(tmp, "numpy.npy")
        fast = run(args.paths, args.t, args.dt, False, fast_out)
        slow = run(args.paths, args.t, args.dt, True, slow_out)
        diff = float(np.abs(np.load(fast_out) - np.load(slow_out)).max())

    steps = args.paths * int(np.ceil(args.t / args.dt))
    print(f"paths={args.paths} steps/path={int(np.ceil(args.t / args.dt))}")
    for r in (fast, slow):
        print(f"  {r['backend']:>6}: total {r['seconds']:7.3f} s, kernel {r['kernel']:7.3f} s"
              f"  ({steps / r['kernel'] / 1e6:6.2f} M steps/s in the kernel)")
    if fast["backend"] == "numba":
        print(f"  speedup: total {slow['seconds'] / fast['seconds']:.2f}x, kernel {slow['kernel'] / fast['kernel']:.2f}x")
    else:
        print("  numba is not installed; both runs used the numpy fallback")
    print(f"  max |q_numba - q_numpy| = {diff:.2e}")


if __name__ == "__main__":
    main()
