"""Compiled versus pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--repeat N]

Covers the Hermitian eigensolver on random matrices and one full moment
relaxation solve, where the Schur-complement assembly dominates.
"""
import argparse
import timeit

import numpy as np

from di_kit import kernels
from di_kit.bell import werner_chsh_table
from di_kit.npo.selftest import bound_anticom_sq


def _hermitian(n, rng):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def _use(backend):
    mod = kernels.load_backend(backend)
    kernels.eigh_hermitian = mod.eigh_hermitian
    kernels.schur_complement = mod.schur_complement
    return mod


def bench(repeat):
    rng = np.random.default_rng(0)
    mats = {n: _hermitian(n, rng) for n in (4, 8, 16, 32, 64)}
    table = werner_chsh_table(0.99)
    rows = []
    for backend in ("compiled", "python"):
        try:
            mod = _use(backend)
        except ImportError:
            print(f"{backend}: not available, skipped")
            continue
        for n, a in mats.items():
            t = min(timeit.repeat(lambda: mod.eigh_hermitian(a), number=20, repeat=repeat)) / 20
            rows.append((backend, f"eigh n={n}", t))
        t = min(timeit.repeat(lambda: bound_anticom_sq(table), number=1, repeat=repeat))
        rows.append((backend, "anticom relaxation v=0.99", t))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rows = bench(args.repeat)
    original = kernels.BACKEND
    _use(original)
    print(f"{'backend':<10}{'case':<30}{'seconds':>12}")
    for backend, case, t in rows:
        print(f"{backend:<10}{case:<30}{t:>12.6f}")
    by_case = {}
    for backend, case, t in rows:
        by_case.setdefault(case, {})[backend] = t
    print()
    for case, times in by_case.items():
        if len(times) == 2:
            print(f"{case:<30} speedup x{times['python'] / times['compiled']:.2f}")


if __name__ == "__main__":
    main()
