#!/usr/bin/env python3
"""Benchmark the block-quadruple mask scan: compiled kernel vs numpy fallback.

The scan is the hot loop of find_block_pairs (all disjoint mask pairs on both
sides, ~3^n x 3^n residual checks before pruning). Run:

    python3 benchmarks/bench_scan.py [--max-n 9]
"""

import argparse
import time

import numpy as np

from hadcert import _scan_py, fourier, petrescu
from hadcert.families import SCAN_SLACK, _edge_tables, find_block_pairs

try:
    from hadcert import _scan_cy
except ImportError:
    _scan_cy = None


def scan_inputs(u, tol=1e-9):
    _, qe, psum, cut = _edge_tables(u)
    qre = np.ascontiguousarray(qe.real)
    qim = np.ascontiguousarray(qe.imag)
    return qre, qim, psum, cut, u.shape[0], 2.0 * tol * tol + SCAN_SLACK


def time_backend(impl, args, repeats=3):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = impl.scan_block_pairs(*args)
        best = min(best, time.perf_counter() - t0)
    return best, sorted(result)


def random_biunitary(n, seed):
    rng = np.random.default_rng(seed)
    k = np.arange(n)
    f = np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    d1 = np.exp(2j * np.pi * rng.random(n))
    d2 = np.exp(2j * np.pi * rng.random(n))
    return (d1[:, None] * f) @ np.eye(n)[rng.permutation(n)] * d2[None, :]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=9)
    args = ap.parse_args()

    cases = [("petrescu(1), n=7", petrescu(1.0)), ("fourier(8)", fourier(8))]
    for n in range(9, args.max_n + 1):
        cases.append((f"random biunitary, n={n}", random_biunitary(n, 99 + n)))

    print(f"{'case':<28} {'quadruples':>10} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, u in cases:
        inputs = scan_inputs(u)
        t_py, r_py = time_backend(_scan_py, inputs, repeats=2)
        if _scan_cy is not None:
            t_cy, r_cy = time_backend(_scan_cy, inputs, repeats=3)
            assert r_cy == r_py, "backend results differ"
            print(f"{name:<28} {len(r_py):>10} {t_py:>9.3f}s {t_cy:>9.3f}s {t_py / t_cy:>7.1f}x")
        else:
            print(f"{name:<28} {len(r_py):>10} {t_py:>9.3f}s {'n/a':>10} {'':>8}")

    # end-to-end comparison including the exact-residual filter
    import os
    t0 = time.perf_counter()
    find_block_pairs(petrescu(1.0))
    t_total = time.perf_counter() - t0
    print(f"\nfind_block_pairs(petrescu(1)) end to end: {t_total:.3f}s "
          f"(backend: {'compiled' if _scan_cy is not None and not os.environ.get('HADCERT_PURE') else 'python'})")


if __name__ == "__main__":
    main()
