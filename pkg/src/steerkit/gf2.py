"""Dense linear algebra over GF(2).

Vectors and matrices are numpy ``uint8`` arrays containing 0/1 entries;
addition is XOR and multiplication is AND. Row reduction, rank, null spaces
and linear solves are the substrate for the Pauli-group and spectrum code.
Null-space bases come back in a fixed pivot-derived order so every
downstream result is deterministic.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "asbits",
    "matmul",
    "row_reduce",
    "rank",
    "right_null_space",
    "solve",
]


def asbits(a, ndim: int | None = None) -> np.ndarray:
    """Validate and convert input to a 0/1 uint8 array.

    Args:
        a: array-like of 0/1 entries.
        ndim: when given, require this dimensionality.

    Returns:
        A fresh ``uint8`` array with entries reduced mod 2.
    """
    arr = np.asarray(a)
    if arr.dtype == object:
        raise ValueError("bit array must be numeric")
    arr = (arr.astype(np.int64) % 2).astype(np.uint8)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected {ndim}-dimensional bit array, got {arr.ndim}")
    return arr


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix (or matrix-vector) product mod 2, returned as uint8."""
    prod = np.asarray(a).astype(np.int64) @ np.asarray(b).astype(np.int64)
    return (prod & 1).astype(np.uint8)


def row_reduce(m) -> tuple[np.ndarray, int, list[int]]:
    """Bring a matrix to reduced row-echelon form over GF(2).

    Args:
        m: 2-d array-like of bits.

    Returns:
        ``(reduced, rank, pivot_cols)`` where ``reduced`` is in RREF with the
        same row space as ``m``, ``rank`` is the number of nonzero rows and
        ``pivot_cols`` lists the pivot column of each such row in order.
    """
    r = asbits(m, ndim=2).copy()
    rows, cols = r.shape
    pivot_cols: list[int] = []
    pivot_row = 0
    for col in range(cols):
        if pivot_row >= rows:
            break
        hits = np.nonzero(r[pivot_row:, col])[0]
        if hits.size == 0:
            continue
        src = pivot_row + hits[0]
        if src != pivot_row:
            r[[pivot_row, src]] = r[[src, pivot_row]]
        # XOR the pivot row into every other row that has a 1 in this column.
        mask = r[:, col].copy()
        mask[pivot_row] = 0
        r ^= np.outer(mask, r[pivot_row])
        pivot_cols.append(col)
        pivot_row += 1
    return r, pivot_row, pivot_cols


def rank(m) -> int:
    """Rank of a bit matrix over GF(2)."""
    return row_reduce(m)[1]


def right_null_space(m) -> list[np.ndarray]:
    """Basis of the right null space, so ``m @ v = 0`` for each vector.

    The basis is canonical: one vector per free column, free columns taken in
    ascending order, each vector having a 1 in its own free column.
    """
    reduced, rk, pivots = row_reduce(m)
    cols = reduced.shape[1]
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = np.zeros(cols, dtype=np.uint8)
        v[fc] = 1
        for row, pc in enumerate(pivots):
            v[pc] = reduced[row, fc]
        basis.append(v)
    assert len(basis) == cols - rk
    return basis


def solve(m, b) -> np.ndarray | None:
    """Particular solution of ``m @ x = b`` over GF(2).

    Returns ``None`` when the system is infeasible; that is an ordinary
    outcome, not an error. The particular solution has zeros in all free
    coordinates, which makes it reproducible.
    """
    mat = asbits(m, ndim=2)
    vec = asbits(b, ndim=1)
    if vec.shape[0] != mat.shape[0]:
        raise ValueError(
            f"right-hand side length {vec.shape[0]} != row count {mat.shape[0]}"
        )
    aug = np.concatenate([mat, vec[:, None]], axis=1)
    reduced, _, pivots = row_reduce(aug)
    cols = mat.shape[1]
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for row, pc in enumerate(pivots):
        x[pc] = reduced[row, cols]
    return x
