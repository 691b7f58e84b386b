"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--cells 200 2000 20000] [--repeat 7]

Reports the best-of-N wall time per call for ``cell_props``, ``pair_fluxes``
and a full residual evaluation on case 1, and checks both backends agree.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from hydromig import _kernels_py
from hydromig.scenarios import build_case

try:
    from hydromig import _kernels as _ext
except ImportError:  # extension not built
    _ext = None


def _inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    C_h = 1.53e-8
    p = 1e6 + rng.uniform(-5e5, 5e5, n)
    r = C_h * np.clip(p + rng.uniform(-2e6, 2e7, n), 0.0, None)
    rock = (np.full(n, 2e6), np.full(n, 1.49), np.full(n, 0.4), np.zeros(n))
    return p, r, rock, C_h


def _time(fn, repeat):
    number = max(1, int(0.2 / max(min(timeit.repeat(fn, number=1, repeat=3)), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def bench(n, repeat):
    p, r, rock, C_h = _inputs(n)
    rows = []
    backends = {"numpy": _kernels_py}
    if _ext is not None:
        backends["cython"] = _ext
    props = {}
    for name, mod in backends.items():
        props[name] = mod.cell_props(p, r, *rock, C_h, 1e-3, 9e-6)
        t = _time(lambda: mod.cell_props(p, r, *rock, C_h, 1e-3, 9e-6), repeat)
        rows.append(("cell_props", name, t))
    S, ll, lg = props["numpy"]
    args = (p[:-1], r[:-1], S[:-1], ll[:-1], lg[:-1], p[1:], r[1:], S[1:], ll[1:], lg[1:],
            np.full(n - 1, 1e-16), np.full(n - 1, 1e-9), np.zeros(n - 1), 1e3, C_h, 7.94e-7)
    for name, mod in backends.items():
        t = _time(lambda: mod.pair_fluxes(*args), repeat)
        rows.append(("pair_fluxes", name, t))
    if "cython" in props:
        err = max(float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
                  for a, b in zip(props["cython"], props["numpy"]))
    else:
        err = None
    return rows, err


def bench_residual(n, repeat):
    """Full residual with whichever backend ``hydromig.kernels`` selected."""
    from hydromig import kernels
    from hydromig.assembly import Assembler
    sc = build_case(1, n)
    asm = Assembler(sc)
    p, r = sc.initial_state()
    r = r + sc.fluid.C_h * 2e6 * np.linspace(1, 0, n)
    t = _time(lambda: asm.residual(p, r, p, r, sc.dt_init), repeat)
    return kernels.BACKEND, t


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, nargs="+", default=[200, 2000, 20000])
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args(argv)
    if _ext is None:
        print("compiled kernels not built; timing the NumPy fallback only")
    print(f"{'cells':>7} {'kernel':<12} {'backend':<7} {'time/call':>12} {'speed-up':>9}")
    for n in args.cells:
        rows, err = bench(n, args.repeat)
        base = {k: t for k, b, t in rows if b == "numpy"}
        for kernel, backend, t in rows:
            print(f"{n:>7} {kernel:<12} {backend:<7} {t * 1e6:>10.1f}us {base[kernel] / t:>8.2f}x")
        if err is not None:
            print(f"{n:>7} max relative difference cython vs numpy: {err:.2e}")
        backend, t = bench_residual(n, args.repeat)
        print(f"{n:>7} {'residual':<12} {backend:<7} {t * 1e6:>10.1f}us")


if __name__ == "__main__":
    main()
