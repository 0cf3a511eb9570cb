"""Compare the numba and numpy backends of the closure kernels.

    python benchmarks/bench_kernels.py [--size 300] [--repeat 3]
"""
import argparse
import time

import numpy as np

from coext import _kernels
from coext.corpus import ring_zn
from coext.finalg import FiniteAlgebra, free_algebra
from coext.terms import Signature


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(size, seed):
    rng = np.random.default_rng(seed)
    sig = Signature([("f", 2), ("g", 1)])
    rand = FiniteAlgebra(sig, size, {"f": rng.integers(0, size, (size, size)), "g": rng.integers(0, size, size)},
                         name=f"random{size}")
    yield rand, [(0, 1)]
    F = free_algebra([ring_zn(2)], 3).algebra        # free Boolean ring on 3 generators, 256 elements
    yield F, [(3, 5)]
    yield ring_zn(size), [(0, size // 2)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
        return
    print(f"{'algebra':<14}{'kernel':<12}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for A, pairs in cases(args.size, args.seed):
        ar, off, flat = A.packed()
        sa = np.array([p[0] for p in pairs], dtype=np.int64)
        sb = np.array([p[1] for p in pairs], dtype=np.int64)
        mask = np.zeros(A.size, dtype=bool)
        mask[:2] = True
        # warm up the JIT so compile time is not counted
        _kernels.cg_closure_numba(A.size, ar, off, flat, sa, sb)
        _kernels.subalgebra_closure_numba(A.size, ar, off, flat, mask.copy())
        for label, f_np, f_nb, inputs in (
                ("closure", _kernels.cg_closure_numpy, _kernels.cg_closure_numba, (sa, sb)),
                ("subalgebra", _kernels.subalgebra_closure_numpy, _kernels.subalgebra_closure_numba, (mask,))):
            t_np, r_np = best_of(lambda: f_np(A.size, ar, off, flat, *[x.copy() for x in inputs]), args.repeat)
            t_nb, r_nb = best_of(lambda: f_nb(A.size, ar, off, flat, *[x.copy() for x in inputs]), args.repeat)
            if isinstance(r_np, tuple):
                same = all(np.array_equal(a, b) for a, b in zip(r_np, r_nb))
            else:
                same = np.array_equal(r_np, r_nb)
            flag = "" if same else "  MISMATCH"
            print(f"{A.name:<14}{label:<12}{t_np:>10.4f}{t_nb:>10.4f}{t_np / max(t_nb, 1e-9):>8.1f}x{flag}")


if __name__ == "__main__":
    main()
