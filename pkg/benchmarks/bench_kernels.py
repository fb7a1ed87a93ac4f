#!/usr/bin/env python3
"""Benchmark the pair-accumulation kernel backends.

Builds synthetic inverted-index postings (Zipf-ish posting lengths over
a configurable account count), runs every available backend on the same
arrays, verifies the outputs are bitwise identical, and reports timings.

Usage: python benchmarks/bench_kernels.py [--accounts N] [--terms N] [--repeats N]
"""

import argparse
import time

import numpy as np

from coordnet import kernels


def synthetic_postings(n_accounts, n_terms, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    lengths = np.minimum(rng.zipf(1.7, size=n_terms), min(64, n_accounts))
    centers = rng.integers(0, n_accounts, size=n_terms)
    offsets = [0]
    accounts = []
    weights = []
    for length, center in zip(lengths, centers):
        # cluster-structured postings: co-occurring accounts sit near a
        # shared center, so the same pairs recur across terms
        members = np.unique(
            (center + rng.integers(0, 48, size=length)) % n_accounts
        ).astype(np.int32)
        accounts.append(members)
        weights.append(rng.random(len(members)))
        offsets.append(offsets[-1] + len(members))
    return (
        np.asarray(offsets, dtype=np.int64),
        np.concatenate(accounts) if accounts else np.empty(0, dtype=np.int32),
        np.concatenate(weights) if weights else np.empty(0, dtype=np.float64),
    )


def bench(func, args, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = func(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--accounts", type=int, default=10_000)
    parser.add_argument("--terms", type=int, default=50_000)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    offsets, accounts, weights = synthetic_postings(args.accounts, args.terms, args.seed)
    pair_work = sum(
        int(l) * (int(l) - 1) // 2 for l in np.diff(offsets)
    )
    print(
        f"postings: {args.terms} terms, {len(accounts)} entries, "
        f"{pair_work} pair products"
    )

    timings = {}
    outputs = {}
    for name in kernels.available_backends():
        func = kernels.get_backend(name)
        elapsed, (keys, dots) = bench(func, (offsets, accounts, weights), args.repeats)
        timings[name] = elapsed
        outputs[name] = (keys, dots)
        print(f"{name:>9}: {elapsed * 1000:9.1f} ms  ({len(keys)} candidate pairs)")

    names = list(outputs)
    for other in names[1:]:
        same = np.array_equal(outputs[names[0]][0], outputs[other][0]) and np.array_equal(
            outputs[names[0]][1], outputs[other][1]
        )
        print(f"bitwise identical ({names[0]} vs {other}): {same}")
        if not same:
            raise SystemExit(1)

    if "compiled" in timings and "python" in timings:
        print(f"speedup: {timings['python'] / timings['compiled']:.1f}x")


if __name__ == "__main__":
    main()
