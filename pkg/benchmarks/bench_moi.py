#!/usr/bin/env python3
"""Benchmark the joint eigen-sum contraction: compiled kernel vs numpy twin.

The contraction dominates runtime of every multilinear-integral evaluation
once dimensions or orders grow; this script times both backends on the
same inputs and reports the speedup.

Usage: python benchmarks/bench_moi.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from traceshift import _contract_py

try:
    from traceshift import _contract

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


def problem(rng, k, d):
    nclus = np.array([d] * (k + 1), dtype=np.intp)
    phi = rng.standard_normal(d ** (k + 1)) + 1j * rng.standard_normal(d ** (k + 1))
    cmaps = np.stack([np.arange(d, dtype=np.intp) for _ in range(k + 1)])
    w = rng.standard_normal((k, d, d)) + 1j * rng.standard_normal((k, d, d))
    return np.ascontiguousarray(phi), nclus, np.ascontiguousarray(cmaps), w


def time_call(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    print(f"compiled kernel available: {HAVE_COMPILED}")
    print(f"{'k':>3} {'dim':>5} {'terms':>10} {'numpy (s)':>12} {'compiled (s)':>13} {'speedup':>8}")
    for k, d in [(1, 8), (2, 8), (3, 8), (2, 12), (3, 12), (4, 10), (5, 8), (6, 6)]:
        inputs = problem(rng, k, d)
        t_py, out_py = time_call(_contract_py.moi_contract, inputs, args.repeat)
        if HAVE_COMPILED:
            t_c, out_c = time_call(_contract.moi_contract, inputs, args.repeat)
            gap = np.max(np.abs(out_py - out_c)) / max(np.max(np.abs(out_py)), 1.0)
            assert gap <= 1e-12, f"backend mismatch: {gap}"
            speed = t_py / t_c
            print(f"{k:>3} {d:>5} {d ** (k + 1):>10} {t_py:>12.5f} {t_c:>13.5f} {speed:>7.1f}x")
        else:
            print(f"{k:>3} {d:>5} {d ** (k + 1):>10} {t_py:>12.5f} {'n/a':>13} {'n/a':>8}")


if __name__ == "__main__":
    main()
