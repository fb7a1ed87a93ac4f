# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
# distutils: language = c++
"""Compiled term-at-a-time accumulator for candidate-pair dot products.

Semantics are defined by coordnet._pairsim_py; this module is a drop-in
replacement whose output is bitwise identical (same per-key addition order,
mul/add never fused, keys returned in ascending order).
"""

import numpy as np

from cython.operator cimport dereference as deref, preincrement as inc
from libcpp.unordered_map cimport unordered_map

ctypedef unordered_map[long long, double] acc_map

BACKEND = "compiled"


def accumulate_pair_products(long long[::1] offsets,
                             int[::1] accounts,
                             double[::1] weights):
    """Accumulate dot-product contributions for every co-occurring pair.

    Postings for term t are accounts[offsets[t]:offsets[t+1]] (ascending
    account index) with aligned weights. Returns (keys, dots) where
    key = (a << 32) | b for account indices a < b, keys ascending.
    """
    cdef acc_map acc
    cdef acc_map.iterator it
    cdef Py_ssize_t n_terms = offsets.shape[0] - 1
    cdef Py_ssize_t t, i, j, lo, hi
    cdef long long key_hi, pair_budget = 0
    cdef double wi

    for t in range(n_terms):
        lo = <Py_ssize_t> offsets[t]
        hi = <Py_ssize_t> offsets[t + 1]
        pair_budget += <long long> (hi - lo) * (hi - lo - 1) // 2
    # reserving up front avoids rehash churn; cap it, beyond this
    # rehashing amortizes fine
    acc.reserve(<size_t> min(pair_budget + 1, 1 << 22))

    for t in range(n_terms):
        lo = <Py_ssize_t> offsets[t]
        hi = <Py_ssize_t> offsets[t + 1]
        for i in range(lo, hi):
            wi = weights[i]
            key_hi = (<long long> accounts[i]) << 32
            for j in range(i + 1, hi):
                acc[key_hi | (<long long> accounts[j])] += wi * weights[j]

    keys = np.empty(acc.size(), dtype=np.int64)
    dots = np.empty(acc.size(), dtype=np.float64)
    cdef long long[::1] kv = keys
    cdef double[::1] dv = dots
    cdef Py_ssize_t pos = 0
    it = acc.begin()
    while it != acc.end():
        kv[pos] = deref(it).first
        dv[pos] = deref(it).second
        pos += 1
        inc(it)

    order = np.argsort(keys)
    return keys[order], dots[order]
