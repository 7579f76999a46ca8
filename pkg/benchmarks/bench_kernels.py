"""Compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times echelon reduction of random sparse rational rows and the associativity
scan of Grassmann algebras, checks that both backends agree, and prints a table.
"""

import argparse
import importlib
import random
import time

from gmpy2 import mpq

from superswan import _kernels_py
from superswan.superring import associativity_violation, grassmann, product


def sparse_rows(n_rows, n_cols, density, seed):
    rng = random.Random(seed)
    rows = []
    for _ in range(n_rows):
        r = {}
        for j in range(n_cols):
            if rng.random() < density:
                r[j] = mpq(rng.randint(-9, 9), rng.randint(1, 5))
        rows.append({k: v for k, v in r.items() if v})
    return rows


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    try:
        compiled = importlib.import_module("superswan._kernels")
    except ImportError:
        print("compiled kernels not built; only the fallback can be timed")
        compiled = None

    cases = []
    for n in (40, 80, 120):
        rows = sparse_rows(n, n, 0.15, seed=n)
        cases.append((f"echelon {n}x{n}", lambda k, rows=rows: k.echelon([dict(r) for r in rows])))
    for name, alg in (("assoc Λ5", grassmann(5)), ("assoc Λ6", grassmann(6)),
                      ("assoc Λ3×Λ4", product(grassmann(3), grassmann(4)))):
        cases.append((name, lambda k, alg=alg: associativity_violation(alg, backend=k)))

    print(f"{'case':<16}{'python (s)':>12}{'compiled (s)':>14}{'speedup':>10}")
    for name, run in cases:
        tp, out_p = best_of(lambda: run(_kernels_py), args.repeat)
        if compiled is None:
            print(f"{name:<16}{tp:>12.4f}{'-':>14}{'-':>10}")
            continue
        tc, out_c = best_of(lambda: run(compiled), args.repeat)
        assert out_p == out_c, f"backends disagree on {name}"
        print(f"{name:<16}{tp:>12.4f}{tc:>14.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
