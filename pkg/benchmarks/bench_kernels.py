"""Timing comparison: compiled tensor kernels vs the numpy fallback.

Run from the repo root:

    python3 benchmarks/bench_kernels.py

Reports per-call times for the diagonal contraction, the gradient-direction
apply, and the power-iteration operator norm, at a few (order, dim, batch)
shapes. The two backends must agree to float tolerance; the benchmark
asserts that before timing.
"""

import itertools
import time

import numpy as np

from hoc import _kernels_py
from hoc import kernels
from hoc._util import substream

SHAPES = [
    (2, 8, 20000),
    (3, 6, 5000),
    (4, 4, 2000),
]
OPNORM_STARTS = 64


def random_dense_symmetric(rng, order, dim):
    arr = np.zeros((dim,) * order)
    for idx in itertools.combinations_with_replacement(range(dim), order):
        val = rng.standard_normal()
        for perm in set(itertools.permutations(idx)):
            arr[perm] = val
    return arr


def timed(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    if kernels.BACKEND == "numpy":
        print("compiled backend unavailable; timing the numpy path against itself")
    print("%-26s %10s %10s %8s" % ("kernel (order,dim,batch)", "compiled", "numpy", "speedup"))
    for order, dim, batch in SHAPES:
        rng = substream(515244, order, dim)
        tensor = random_dense_symmetric(rng, order, dim)
        points = rng.standard_normal((batch, dim))
        starts = rng.standard_normal((OPNORM_STARTS, dim))
        shift = float(np.linalg.norm(tensor))
        for name, comp_fn, ref_fn in [
            ("diagonal_values",
             lambda: kernels.diagonal_values(tensor, points),
             lambda: _kernels_py.diagonal_values(tensor, points)),
            ("diagonal_apply",
             lambda: kernels.diagonal_apply(tensor, points),
             lambda: _kernels_py.diagonal_apply(tensor, points)),
            ("power_opnorm",
             lambda: kernels.power_opnorm(tensor, starts, shift),
             lambda: _kernels_py.power_opnorm(tensor, starts, shift, 1e-10, 10000)),
        ]:
            t_comp, out_comp = timed(comp_fn)
            t_ref, out_ref = timed(ref_fn)
            if not np.allclose(out_comp, out_ref, rtol=1e-8, atol=1e-10):
                raise AssertionError("backend mismatch in %s at %s"
                                     % (name, (order, dim, batch)))
            label = "%s (%d,%d,%d)" % (name, order, dim, batch)
            print("%-26s %9.4fs %9.4fs %7.1fx" % (label, t_comp, t_ref,
                                                  t_ref / max(t_comp, 1e-12)))


if __name__ == "__main__":
    main()
