"""Compare the compiled and numpy orbit/staircase kernels.

    python benchmarks/bench_kernels.py [--res 128] [--steps 2000] [--threads 1 4]
"""

import argparse
import time

import numpy as np

from torusrot import _pykernels
from torusrot.orbit import GridSpec

try:
    from torusrot import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--res", type=int, default=128)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 4])
    ap.add_argument("--stair", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    pts = GridSpec(args.res).points()
    cps = np.array([args.steps // 4, args.steps // 2, args.steps], dtype=np.int64)
    params = (1.2, 1.2, 0.0, 0.0)
    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled extension not available; timing the numpy kernels only")

    work = len(pts) * args.steps
    print(f"orbits: {len(pts)} seeds x {args.steps} steps, TwoShear(1.2, 1.2)")
    results = {}
    for threads in args.threads:
        for name, mod in backends:
            dt, out = best_of(lambda: mod.shear_orbits(pts, cps, *params, threads), args.repeat)
            results[(name, threads)] = out
            print(f"  {name:7s} threads={threads:<3d} {dt:8.3f} s  {work / dt / 1e6:8.1f} Msteps/s")
    ref = results[("python", args.threads[0])]
    same = all(np.array_equal(ref, v) for v in results.values())
    print(f"  outputs bitwise identical across backends and threads: {same}")

    print(f"staircase: {args.stair} steps, golden-ratio slope")
    phi = (1 + 5 ** 0.5) / 2
    a, b = 1 / np.hypot(1, 1 / phi), (1 / phi) / np.hypot(1, 1 / phi)
    outs = []
    for name, mod in backends:
        dt, out = best_of(lambda: mod.staircase_float(-b, a, args.stair), args.repeat)
        outs.append(out)
        print(f"  {name:7s} {dt:8.3f} s")
    if len(outs) == 2:
        same = np.array_equal(outs[0][0], outs[1][0]) and np.array_equal(outs[0][1], outs[1][1])
        print(f"  outputs bitwise identical: {same}")


if __name__ == "__main__":
    main()
