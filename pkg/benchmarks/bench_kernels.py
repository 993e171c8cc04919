"""Compare the compiled RK4 kernel with the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Each scenario is integrated with both backends; the script reports the best
wall time of ``repeat`` runs, the speedup and whether the trajectories are
bitwise identical.
"""

import argparse
import math
import time

import numpy as np

from memsdelay import kernels
from memsdelay.ddesolve import integrate
from memsdelay.model import ActuatorParams, Linear, SqueezeFilm, VoltageProfile
from memsdelay.statics import equilibria

E, V0 = 9.9e-6, 20.0
T = 2 * math.pi


def scenarios():
    x2 = equilibria(E, V0).x2
    forced = VoltageProfile.cosine(V0, 0.1579)
    yield "forced, no delay, 100T", ActuatorParams(E, Linear(5.4e-3), forced), (x2 + 0.01, 0.0), 100 * T, T / 64
    yield ("forced, d=1, g2=-8, 100T", ActuatorParams(E, Linear(5.4e-3), forced, 0.0, -8.0, 1.0),
           (x2 + 0.01, 0.0), 100 * T, 1 / 32)
    yield ("autonomous squeeze, d=10, 100T", ActuatorParams(E, SqueezeFilm(3e-4), VoltageProfile(V0), 3e-4, 0.37, 10.0),
           (x2 + 0.01, 0.0), 100 * T, T / 64)


def best_time(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        kernels.get_kernel("cython")
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return
    print(f"{'scenario':34s} {'steps':>7s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}  bitwise")
    for name, params, hist, t_end, step in scenarios():
        tp, a = best_time(lambda: integrate(params, hist, t_end, step, backend="python"), args.repeat)
        tc, b = best_time(lambda: integrate(params, hist, t_end, step, backend="cython"), args.repeat)
        same = np.array_equal(a.y, b.y)
        print(f"{name:34s} {len(a.t) - 1:7d} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f}  {same}")


if __name__ == "__main__":
    main()
