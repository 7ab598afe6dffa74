"""Numba vs pure-numpy timings of the two hot kernels.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

The numba variants are called directly, so the comparison runs in one process
whatever ``CMNLS_PURE_NUMPY`` is set to.  Each row also reports the maximum
difference between the two results.
"""

import argparse
import json
import time

import numpy as np

from cmnls_halfline import kernels
from cmnls_halfline._accel import USE_NUMBA


def _best(fn, repeat):
    fn()  # warm-up (jit compile / cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_etdrk4(nsteps, repeat, rng):
    C = 1j * rng.normal(size=(3, 3)) - 0.1
    coef = kernels.etd_coefficients(C, 0.01)
    Qs = 0.3 * (rng.normal(size=(2 * nsteps + 1, 3, 3)) + 1j * rng.normal(size=(2 * nsteps + 1, 3, 3)))
    Y0 = np.eye(3, dtype=complex)
    args = [np.ascontiguousarray(a, dtype=complex) for a in (Y0, *coef, Qs)]
    t_np, y_np = _best(lambda: kernels._etdrk4_leg_numpy(*args), repeat)
    t_nb, y_nb = _best(lambda: kernels._etdrk4_leg_numba(*args), repeat)
    return {"kernel": "etdrk4_leg", "size": nsteps, "numpy_s": t_np, "numba_s": t_nb,
            "speedup": t_np / t_nb, "max_diff": float(np.abs(y_np - y_nb).max())}


def bench_rk4(nx, nsteps, repeat, rng):
    x = np.linspace(-20, 20, nx)
    dx = x[1] - x[0]
    u = (0.3 * np.exp(-(x - 5) ** 2)).astype(complex)
    v = (0.2 * np.exp(-(x - 5) ** 2)).astype(complex)
    h = 0.2 * dx * dx
    t_np, (un, vn) = _best(lambda: kernels._rk4_advance_numpy(u, v, nsteps, h, dx, 2.0, 1.0, False), repeat)
    t_nb, (ub, vb) = _best(lambda: kernels._rk4_advance_numba(u, v, nsteps, h, dx, 2.0, 1.0, False), repeat)
    return {"kernel": "rk4_advance", "size": nx, "numpy_s": t_np, "numba_s": t_nb, "speedup": t_np / t_nb,
            "max_diff": float(max(np.abs(un - ub).max(), np.abs(vn - vb).max()))}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the rows to this file")
    args = ap.parse_args(argv)
    if not USE_NUMBA:
        print("numba disabled (CMNLS_PURE_NUMPY set or numba missing); numba columns time the python loop")
    rng = np.random.default_rng(0)
    rows = [bench_etdrk4(n, args.repeat, rng) for n in (200, 2000, 20000)]
    rows += [bench_rk4(nx, 200, args.repeat, rng) for nx in (801, 3201)]
    print(f"{'kernel':<12} {'size':>6} {'numpy [s]':>11} {'numba [s]':>11} {'speedup':>8} {'max diff':>10}")
    for r in rows:
        print(f"{r['kernel']:<12} {r['size']:>6} {r['numpy_s']:>11.4g} {r['numba_s']:>11.4g} "
              f"{r['speedup']:>8.1f} {r['max_diff']:>10.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
