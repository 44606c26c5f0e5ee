# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for sweeping affine GF(2) solution sets.

Same contracts and bit layout as steerkit._kernels: vectors are uint64
masks over up to 64 terms, the sweep order is the Gray-code sequence, and
results match the pure-numpy fallback bit for bit.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline double _energy_of(unsigned long long v, const double[::1] w, double tot_w) nogil:
    # Fresh ascending-index accumulation; must mirror the fallback exactly
    # so both backends produce identical floating-point energies.
    cdef double acc = 0.0
    cdef unsigned long long m = v
    cdef int b
    while m:
        b = __builtin_ctzll(m)
        acc += w[b]
        m &= m - 1
    return tot_w - 2.0 * acc


def gray_min_energy(masks_in, s_mask, weights_in):
    """Exhaustive minimum over the affine solution set.

    Returns (best_energy, best_vector_mask, count_near_minimum): the exact
    minimum energy, the first vector in Gray order attaining it exactly,
    and the number of vectors within an absolute 1e-12 of it. The count is
    anchored at the final minimum, so it does not depend on visit order.
    """
    cdef const cnp.uint64_t[::1] masks = np.ascontiguousarray(masks_in, dtype=np.uint64)
    cdef const double[::1] w = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef Py_ssize_t n_free = masks.shape[0]
    cdef Py_ssize_t n_terms = w.shape[0]
    cdef unsigned long long v = <unsigned long long> s_mask
    cdef unsigned long long total = (<unsigned long long> 1) << n_free
    cdef unsigned long long k, best_v
    cdef double e, best_e, tot_w = 0.0
    cdef long long n_best = 0
    cdef Py_ssize_t i

    for i in range(n_terms):
        tot_w += w[i]

    best_e = _energy_of(v, w, tot_w)
    best_v = v
    k = 1
    while k < total:
        # Gray transition: flip the row indexed by the trailing zeros of k.
        v ^= masks[__builtin_ctzll(k)]
        e = _energy_of(v, w, tot_w)
        if e < best_e:
            best_e = e
            best_v = v
        k += 1

    v = <unsigned long long> s_mask
    if _energy_of(v, w, tot_w) <= best_e + 1e-12:
        n_best += 1
    k = 1
    while k < total:
        v ^= masks[__builtin_ctzll(k)]
        if _energy_of(v, w, tot_w) <= best_e + 1e-12:
            n_best += 1
        k += 1
    return best_e, int(best_v), int(n_best)


def gray_weight_counts(masks_in, s_mask, n_terms):
    """Histogram of bit weights over the affine solution set."""
    cdef const cnp.uint64_t[::1] masks = np.ascontiguousarray(masks_in, dtype=np.uint64)
    cdef Py_ssize_t n_free = masks.shape[0]
    counts_arr = np.zeros(int(n_terms) + 1, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef unsigned long long v = <unsigned long long> s_mask
    cdef unsigned long long total = (<unsigned long long> 1) << n_free
    cdef unsigned long long k

    counts[__builtin_popcountll(v)] += 1
    k = 1
    while k < total:
        v ^= masks[__builtin_ctzll(k)]
        counts[__builtin_popcountll(v)] += 1
        k += 1
    return counts_arr
