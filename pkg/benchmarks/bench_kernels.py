"""Compare the numba and pure-numpy amplitude kernels.

    python benchmarks/bench_kernels.py [--nodes 8192] [--repeat 20]

Part 1 times the raw kernel in-process. Part 2 times a full coherent ADCS point
in two subprocesses, one per ``COBREMS_BACKEND`` value.
"""

import argparse
import math
import os
import subprocess
import sys
import time

import numpy as np

from cobrems import _kernels
from cobrems._backend import HAVE_NUMBA
from cobrems.amplitude import amplitude_table
from cobrems.cross_section import branch_nodes
from cobrems.kinematics import direction, superposition_geometry

POINT_SNIPPET = """
import math, time
from cobrems import PhotonSpec, adcs_parts, superposition_geometry
cfg = superposition_geometry(200.0, math.radians(30.0))
adcs_parts(cfg, PhotonSpec(10.0, 0.3))
t = []
for i in range({repeat}):
    t0 = time.perf_counter()
    adcs_parts(cfg, PhotonSpec(10.0, 0.05 + 0.1 * i, 0.4))
    t.append(time.perf_counter() - t0)
t.sort()
print(t[len(t) // 2])
"""


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=8192)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    cfg = superposition_geometry(200.0, math.radians(30.0))
    ps = np.stack([e.four_momentum for e in cfg.electrons])
    kd = direction(0.3, 0.0)
    n_theta = max(8, int(math.sqrt(args.nodes / 2)))
    dirs, _ = branch_nodes(ps[0, 1:], 10.0 * kd, 190.0, n_theta, args.nodes // n_theta)

    print(f"kernel, {len(dirs)} nodes x 2 branches x 8 channels")
    t_np = _best(lambda: amplitude_table(ps, 10.0, kd, dirs, kernel=_kernels.branch_amplitudes_np), args.repeat)
    print(f"  numpy  {1e3 * t_np:8.2f} ms")
    if HAVE_NUMBA:
        t_nb = _best(lambda: amplitude_table(ps, 10.0, kd, dirs, kernel=_kernels.branch_amplitudes), args.repeat)
        a, _ = amplitude_table(ps, 10.0, kd, dirs, kernel=_kernels.branch_amplitudes)
        b, _ = amplitude_table(ps, 10.0, kd, dirs, kernel=_kernels.branch_amplitudes_np)
        diff = float(np.max(np.abs(a - b)) / np.max(np.abs(b)))
        print(f"  numba  {1e3 * t_nb:8.2f} ms  speedup {t_np / t_nb:5.1f}x  max rel diff {diff:.1e}")
    else:
        print("  numba  not installed")

    print("full coherent ADCS point (default quadrature, median)")
    for backend in ("numpy", "numba"):
        if backend == "numba" and not HAVE_NUMBA:
            continue
        env = dict(os.environ, COBREMS_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, "-c", POINT_SNIPPET.format(repeat=args.repeat)],
            env=env, capture_output=True, text=True, check=True,
        )
        print(f"  {backend:<6s} {1e3 * float(out.stdout.strip()):8.2f} ms")


if __name__ == "__main__":
    main()
