"""Time the compiled and numpy Gram kernels on the same pipeline spectra.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from fractal_riesz import _kernels_py
from fractal_riesz.digit_search import find_digit_system
from fractal_riesz.ifs_core import factor_error, make_ifs
from fractal_riesz.spectrum import build_spectrum, plan_schedule
from fractal_riesz.verifier import digit_tensor

try:
    from fractal_riesz import _ckernels
except ImportError:
    _ckernels = None

CASES = {
    "cantor3": (3, [0, 2]),
    "lebesgue2": (2, [0, 1]),
    "twodim": ([[2, 1], [0, 2]], [[0, 0], [1, 0]]),
}


def setup(R, B):
    spec = make_ifs(R, B)
    ds, sched = plan_schedule(find_digit_system(spec, 0.24), 3, 256, 0.24)
    sp = build_spectrum(spec, ds, 5, 3, sched)
    dig = digit_tensor(spec, sp.points)
    ct = spec.contraction
    ef = factor_error(spec, max(2 * float(np.sqrt((dig**2).sum(axis=2)).max()), 1.0))
    args = (dig, spec.s_inv, spec.b_array, spec.p_array, spec.lipschitz, ct.c, ct.kappa, 5e-11, 2.5e-11, ef,
            10**6)
    return len(sp.points), args


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    opts = ap.parse_args()
    print(f"{'case':<10} {'points':>6} {'python s':>10} {'cython s':>10} {'speedup':>8} {'max |dG|':>10}")
    for name, (R, B) in CASES.items():
        n, args = setup(R, B)
        tp, (Gp, _, _) = best_of(_kernels_py.gram_products, args, opts.repeat)
        if _ckernels is None:
            print(f"{name:<10} {n:>6} {tp:>10.3f} {'n/a':>10}")
            continue
        tc, (Gc, _, _) = best_of(_ckernels.gram_products, args, opts.repeat)
        print(f"{name:<10} {n:>6} {tp:>10.3f} {tc:>10.3f} {tp / tc:>8.1f} {np.abs(Gp - Gc).max():>10.1e}")


if __name__ == "__main__":
    main()
