"""Compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Times the two hot loops on the workloads the toolkit actually runs: a phase
grid of transfer products (one ``L_m`` evaluation) and Sturm counts over an
energy grid (one IDS curve).  Both backends are called directly, so a single
process compares them; outputs are checked for bitwise agreement.
"""
import argparse
import time

import numpy as np

from qps import _pykernels
from qps.arithmetic import Frequency
from qps.cocycle import Cocycle, Potential, orbit_potential
from qps.ids import FiniteOperator
from qps.lyapunov import theta_grid

try:
    from qps import _kernels
except ImportError:
    _kernels = None


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def workloads(quick):
    golden = Frequency.golden()
    coc = Cocycle(Potential.amo(3.0), 0j, golden)
    sizes = [(256, 200), (1024, 500)] if quick else [(256, 200), (2048, 1000), (2048, 4000)]
    for n_theta, m in sizes:
        vals = orbit_potential(coc, theta_grid(n_theta), 0.0, 0, m)
        vre, vim = np.ascontiguousarray(vals.real), np.ascontiguousarray(vals.imag)
        starts = np.zeros(1, dtype=np.intp)
        yield (f"grid_log_norms n_theta={n_theta} m={m}",
               lambda k, a=vre, b=vim, m=m, s=starts: k.grid_log_norms(a, b, 0.0, 0.0, m, s))
    for N, n_e in ([(1024, 1000)] if quick else [(2048, 2001), (8192, 4001)]):
        op = FiniteOperator.from_potential(coc.potential, golden, 0.0, N)
        energies = np.linspace(-8, 8, n_e)
        yield (f"sturm_counts N={N} energies={n_e}",
               lambda k, d=op.diagonal, e=energies: k.sturm_counts(np.ascontiguousarray(d), e))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--quick", action="store_true", help="small sizes only")
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'workload':42s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>8s}  equal")
    for name, run in workloads(args.quick):
        t_py, out_py = best_time(lambda: run(_pykernels), args.repeat)
        if _kernels is None:
            print(f"{name:42s} {t_py:11.4f} {'-':>13s} {'-':>8s}  -")
            continue
        t_c, out_c = best_time(lambda: run(_kernels), args.repeat)
        same = np.array_equal(out_py, out_c)
        print(f"{name:42s} {t_py:11.4f} {t_c:13.4f} {t_py / t_c:8.1f}x  {same}")


if __name__ == "__main__":
    main()
