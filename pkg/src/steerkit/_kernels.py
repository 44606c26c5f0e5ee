"""Pure-numpy kernels for sweeping affine GF(2) solution sets.

Bit layout: an energy vector over N <= 64 terms is a uint64 with bit i set
when term i has eigenvalue -1. The sweep runs over all XOR combinations of
``masks`` added to ``s_mask``, visiting them in Gray-code order (index k
maps to code k ^ (k >> 1)), which is the canonical enumeration order used
everywhere. The compiled twin in ``_ckernels`` implements the same
contracts; outputs are identical bit for bit.
"""

from __future__ import annotations

import numpy as np

from .pauli import _popcount

_CHUNK = 1 << 16


def _chunk_vectors(masks: np.ndarray, s_mask: int, start: int, stop: int) -> np.ndarray:
    """Energy-vector masks for sweep indices [start, stop) in Gray order."""
    idx = np.arange(start, stop, dtype=np.uint64)
    gray = idx ^ (idx >> np.uint64(1))
    v = np.full(stop - start, np.uint64(s_mask), dtype=np.uint64)
    for r in range(masks.shape[0]):
        sel = ((gray >> np.uint64(r)) & np.uint64(1)).astype(bool)
        v[sel] ^= masks[r]
    return v


def _chunk_energies(v: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Energies sum_i w_i (1 - 2 bit_i(v)) for a chunk of vector masks.

    The ascending-index accumulation order is part of the backend contract;
    the compiled twin adds terms in exactly the same order so both produce
    identical floating-point values.
    """
    total = 0.0
    for i in range(weights.shape[0]):
        total += float(weights[i])
    acc = np.zeros(v.shape[0], dtype=np.float64)
    for i in range(weights.shape[0]):
        bit = ((v >> np.uint64(i)) & np.uint64(1)).astype(np.float64)
        acc += weights[i] * bit
    return total - 2.0 * acc


def gray_min_energy(
    masks: np.ndarray, s_mask: int, weights: np.ndarray
) -> tuple[float, int, int]:
    """Exhaustive minimum over the affine solution set.

    Returns (best_energy, best_vector_mask, count_near_minimum): the exact
    minimum energy, the first vector in Gray order attaining it exactly,
    and the number of vectors within an absolute 1e-12 of it. The count is
    anchored at the final minimum, so it does not depend on visit order.
    """
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    total = 1 << masks.shape[0]
    best_e = np.inf
    best_v = int(s_mask)
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        v = _chunk_vectors(masks, s_mask, start, stop)
        e = _chunk_energies(v, weights)
        lo = float(e.min())
        if lo < best_e:
            best_e = lo
            best_v = int(v[int(np.argmin(e))])
    n_best = 0
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        v = _chunk_vectors(masks, s_mask, start, stop)
        e = _chunk_energies(v, weights)
        n_best += int(np.count_nonzero(e <= best_e + 1e-12))
    return best_e, best_v, n_best


def gray_weight_counts(masks: np.ndarray, s_mask: int, n_terms: int) -> np.ndarray:
    """Histogram of bit weights over the affine solution set.

    counts[w] = number of solution vectors with exactly w bits set; the sum
    of counts is 2^len(masks).
    """
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    total = 1 << masks.shape[0]
    counts = np.zeros(n_terms + 1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        v = _chunk_vectors(masks, s_mask, start, stop)
        w = _popcount(v)
        counts += np.bincount(w, minlength=n_terms + 1)[: n_terms + 1]
    return counts
