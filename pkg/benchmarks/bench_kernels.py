"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--quick]
"""

import argparse
import time

import numpy as np

from hopcolor import _backend, _pykernels
from hopcolor.graph_model import GridSpec, build_grid
from hopcolor.serena_sim import compute_prio_all, priority_ranks
from hopcolor.vector_method import _candidates, _near, exact_range


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(quick):
    size = 20 if quick else 30
    for R in (1, 2):
        t = build_grid(GridSpec(size, size, R))
        rank = priority_ranks(compute_prio_all(t), t.ids)
        label = f"{size}x{size} R={R}"
        yield f"ball_csr h=3 {label}", lambda k, t=t: k.ball_csr(t.indptr, t.indices, 3)
        yield f"serena_rounds {label}", lambda k, t=t, rank=rank: k.serena_rounds(t.indptr, t.indices, rank, 100_000, 4, 1)
    small = build_grid(GridSpec(4, 4, 1))
    ptr, flat, _ = small.ball(3)
    yield "exact_color 4x4 R=1 h=3", lambda k: k.exact_color(ptr, flat, 1, np.arange(small.n))
    for R in (2, 3) if quick else (2, 3, 4):
        r = exact_range(R)
        near = _near(r, 3)
        cx, cy = _candidates(r, 3, int(np.ceil(3 * R)), near, annulus=False)
        bound = np.iinfo(np.int64).max
        yield f"lattice_search R={R} h=3", lambda k, cx=cx, cy=cy, near=near: k.lattice_search(cx, cy, near[:, 0], near[:, 1], bound)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--quick", action="store_true", help="smaller instances")
    args = p.parse_args(argv)
    if _backend.compiled is None:
        print("compiled extension not available; only the Python kernels can be timed")
    print(f"{'kernel':34s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s}")
    for name, fn in cases(args.quick):
        py = best_of(lambda: fn(_pykernels), args.repeat)
        if _backend.compiled is None:
            print(f"{name:34s} {'-':>10s} {py:10.4f} {'-':>8s}")
            continue
        cy = best_of(lambda: fn(_backend.compiled), args.repeat)
        print(f"{name:34s} {cy:10.4f} {py:10.4f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
