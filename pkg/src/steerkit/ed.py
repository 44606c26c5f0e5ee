"""Exact diagonalization and fermionic operator tooling.

Conventions used throughout:

* Qubit 0 is the leftmost (most significant) tensor factor, matching the
  Pauli string format, so computational basis index b assigns qubit q the
  bit at position n-1-q.
* Fermionic mode j occupies the same slot as qubit j. A basis index
  therefore encodes occupation n_j at bit position m-1-j, and sector bases
  are sorted by ascending index.
* The fermion-to-qubit mapping places parity strings on lower-numbered
  modes: c_j = (prod_{k<j} Z_k) (X_j + i Y_j)/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import pauli
from .pauli import _popcount

__all__ = [
    "FermionTerm",
    "EigenSolution",
    "GroundManifold",
    "DENSE_CAP",
    "fermion_matrix",
    "jordan_wigner",
    "pauli_sum_matrix",
    "mode_transform",
    "expand_linear_products",
    "number_sector",
    "spin_sector",
    "occupations",
    "embed_sector",
    "restrict_sector",
    "diagonalize",
    "symmetry_block_values",
    "ground_manifold",
]

DENSE_CAP = 20_000


@dataclass(frozen=True)
class FermionTerm:
    """coeff times a product of ladder operators, applied right to left.

    ops is a tuple of (mode, creation) pairs; ops[0] is the leftmost
    factor of the product.
    """

    coeff: complex
    ops: tuple[tuple[int, bool], ...]


@dataclass(frozen=True)
class EigenSolution:
    values: np.ndarray
    vectors: np.ndarray | None


@dataclass(frozen=True)
class GroundManifold:
    energy: float
    degeneracy: int
    gap: float
    vectors: np.ndarray


# -- sector bookkeeping ---------------------------------------------------


def number_sector(m: int, k: int) -> np.ndarray:
    """Ascending basis indices with total occupation k out of m modes."""
    states = np.arange(1 << m, dtype=np.uint64)
    return np.nonzero(_popcount(states) == k)[0].astype(np.int64)


def spin_sector(sites: int, n_up: int, n_down: int) -> np.ndarray:
    """Basis indices with fixed per-spin occupation, spin-major modes.

    Mode layout: modes 0..sites-1 carry spin up, modes sites..2*sites-1
    spin down, so the high half of the index holds the up occupations.
    """
    m = 2 * sites
    states = np.arange(1 << m, dtype=np.uint64)
    low = np.uint64((1 << sites) - 1)
    up = _popcount(states >> np.uint64(sites))
    down = _popcount(states & low)
    return np.nonzero((up == n_up) & (down == n_down))[0].astype(np.int64)


def occupations(m: int, index: int) -> np.ndarray:
    """Occupation bits (n_0, ..., n_{m-1}) of a basis index."""
    return ((int(index) >> (m - 1 - np.arange(m))) & 1).astype(np.uint8)


def embed_sector(vec: np.ndarray, basis: np.ndarray, m: int) -> np.ndarray:
    full = np.zeros(1 << m, dtype=np.result_type(vec.dtype, np.float64))
    full[basis] = vec
    return full


def restrict_sector(mat, basis: np.ndarray):
    """Submatrix on the given basis indices (sparse in, sparse out)."""
    basis = np.asarray(basis, dtype=np.int64)
    if scipy.sparse.issparse(mat):
        return mat.tocsr()[basis, :][:, basis]
    return np.asarray(mat)[np.ix_(basis, basis)]


# -- fermionic matrix construction ---------------------------------------


def _apply_ops_to_states(
    m: int, ops, states: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized ladder-product action on an array of basis indices.

    Returns (alive mask, resulting indices, accumulated signs). Signs are
    the Jordan-Wigner parity factors from modes below each acted mode.
    """
    cur = states.astype(np.uint64).copy()
    alive = np.ones(cur.shape, dtype=bool)
    sign = np.ones(cur.shape, dtype=np.int8)
    for mode, creation in reversed(ops):
        pos = np.uint64(m - 1 - mode)
        bit = (cur >> pos) & np.uint64(1)
        alive &= bit == (0 if creation else 1)
        parity = _popcount(cur >> np.uint64(m - mode)) & 1
        sign = np.where(parity == 1, -sign, sign).astype(np.int8)
        cur = cur ^ (np.uint64(1) << pos)
    return alive, cur, sign


def fermion_matrix(
    m: int, terms: Iterable[FermionTerm], basis: np.ndarray | None = None
) -> scipy.sparse.csr_matrix:
    """Sparse matrix of a ladder-operator sum, optionally sector-restricted.

    With ``basis`` given, the matrix lives on that subspace; images that
    leave the subspace are dropped, which is only sound for block-diagonal
    operators, so callers restrict to symmetry sectors.
    """
    if basis is None:
        basis = np.arange(1 << m, dtype=np.int64)
    basis = np.asarray(basis, dtype=np.int64)
    dim = basis.shape[0]
    data_parts: list[np.ndarray] = []
    row_parts: list[np.ndarray] = []
    col_parts: list[np.ndarray] = []
    cols = np.arange(dim, dtype=np.int64)
    for term in terms:
        alive, out, sgn = _apply_ops_to_states(m, term.ops, basis)
        if not np.any(alive):
            continue
        out_alive = out[alive].astype(np.int64)
        pos = np.searchsorted(basis, out_alive)
        pos = np.clip(pos, 0, dim - 1)
        inside = basis[pos] == out_alive
        keep = np.nonzero(alive)[0][inside]
        data_parts.append(term.coeff * sgn[keep].astype(np.complex128))
        row_parts.append(pos[inside])
        col_parts.append(cols[keep])
    if not data_parts:
        return scipy.sparse.csr_matrix((dim, dim), dtype=np.complex128)
    mat = scipy.sparse.coo_matrix(
        (np.concatenate(data_parts), (np.concatenate(row_parts), np.concatenate(col_parts))),
        shape=(dim, dim),
        dtype=np.complex128,
    ).tocsr()
    mat.sum_duplicates()
    return mat


# -- fermion-to-qubit mapping --------------------------------------------


def _ladder_components(m: int, mode: int, creation: bool):
    """Ladder operator as a two-Pauli combination with complex weights."""
    z_string = np.zeros(m, dtype=np.uint8)
    z_string[:mode] = 1
    x = np.zeros(m, dtype=np.uint8)
    x[mode] = 1
    zx = z_string.copy()
    zy = z_string.copy()
    zy[mode] = 1
    op_x = pauli.PauliOp(x, zx, 0)
    op_y = pauli.PauliOp(x, zy, 1)
    s = -0.5j if creation else 0.5j
    return [(op_x, 0.5 + 0.0j), (op_y, s)]


def jordan_wigner(
    m: int, terms: Iterable[FermionTerm], tol: float = 1e-14
) -> list[tuple[pauli.PauliOp, complex]]:
    """Expand a ladder-operator sum into phase-free Pauli strings.

    Returned operators all carry phase 0; signs and factors of i live in
    the complex coefficients. Terms below ``tol`` in magnitude are dropped.
    """
    acc: dict[bytes, tuple[pauli.PauliOp, complex]] = {}
    for term in terms:
        partial = [(pauli.identity(m), complex(term.coeff))]
        for mode, creation in term.ops:
            comps = _ladder_components(m, mode, creation)
            nxt = []
            for op, c in partial:
                for fop, fc in comps:
                    nxt.append((pauli.multiply(op, fop), c * fc))
            partial = nxt
        for op, c in partial:
            flat = pauli.PauliOp(op.x, op.z, 0)
            c = c * (1j ** op.phase)
            key = flat.x.tobytes() + flat.z.tobytes()
            if key in acc:
                acc[key] = (flat, acc[key][1] + c)
            else:
                acc[key] = (flat, c)
    return [(op, c) for op, c in acc.values() if abs(c) > tol]


def pauli_sum_matrix(
    pairs: Sequence[tuple[pauli.PauliOp, complex]], cap: int = pauli.MATERIALIZE_CAP
) -> np.ndarray:
    if not pairs:
        raise ValueError("empty Pauli sum")
    n = pairs[0][0].n
    mat = np.zeros((1 << n, 1 << n), dtype=np.complex128)
    for op, c in pairs:
        mat += c * pauli.materialize(op, cap=cap)
    return mat


# -- linear mode combinations --------------------------------------------


def expand_linear_products(
    factors: Sequence[Sequence[tuple[complex, int, bool]]],
    prefactor: complex = 1.0,
) -> list[FermionTerm]:
    """Distribute a product of linear ladder combinations into terms.

    Each factor is a list of (coeff, mode, creation) summands; the product
    is expanded left to right.
    """
    partial: list[tuple[complex, tuple[tuple[int, bool], ...]]] = [(complex(prefactor), ())]
    for factor in factors:
        partial = [
            (c * fc, ops + ((mode, creation),))
            for c, ops in partial
            for fc, mode, creation in factor
        ]
    return [FermionTerm(c, ops) for c, ops in partial if c != 0]


def mode_transform(terms: Iterable[FermionTerm], U: np.ndarray) -> list[FermionTerm]:
    """Rewrite terms given in rotated modes d_k = sum_j U_{kj} c_j.

    Creation operators pick up the conjugate coefficients. The result is
    a ladder-term list in the original modes, with like terms uncombined.
    """
    U = np.asarray(U, dtype=np.complex128)
    out: list[FermionTerm] = []
    for term in terms:
        factors = []
        for mode, creation in term.ops:
            row = np.conj(U[mode]) if creation else U[mode]
            factors.append(
                [(complex(row[j]), j, creation) for j in range(U.shape[1]) if row[j] != 0]
            )
        out.extend(expand_linear_products(factors, prefactor=term.coeff))
    return out


# -- diagonalization ------------------------------------------------------


def _as_dense_hermitian(mat) -> np.ndarray:
    if scipy.sparse.issparse(mat):
        mat = mat.toarray()
    mat = np.asarray(mat)
    if mat.dtype.kind == "c" and np.abs(mat.imag).max(initial=0.0) < 1e-13:
        mat = np.ascontiguousarray(mat.real)
    return mat


def _check_residuals(mat, values, vectors, norm, rel_tol=1e-8, max_cols=32):
    dim = values.shape[0]
    if vectors is None or dim == 0:
        return
    if dim <= 2048:
        cols = np.arange(dim)
    else:
        cols = np.linspace(0, dim - 1, max_cols).astype(np.int64)
    v = vectors[:, cols]
    resid = mat @ v - v * values[cols][None, :]
    worst = float(np.linalg.norm(resid, axis=0).max(initial=0.0))
    if worst > rel_tol * max(norm, 1e-300):
        raise AssertionError(
            f"eigenpair residual {worst:.3e} exceeds {rel_tol:.0e} * norm {norm:.3e}"
        )


def diagonalize(mat, compute_vectors: bool = True, cap: int = DENSE_CAP) -> EigenSolution:
    """Full dense eigendecomposition with a residual sanity check.

    Values are ascending. Eigenvalue-only calls use a low-workspace LAPACK
    driver so large sector matrices stay within memory.
    """
    dim = mat.shape[0]
    if dim > cap:
        raise ValueError(f"dimension {dim} exceeds dense cap {cap}")
    dense = _as_dense_hermitian(mat)
    herm_gap = np.abs(dense - dense.conj().T).max(initial=0.0)
    if herm_gap > 1e-10:
        raise ValueError(f"matrix is not Hermitian (asymmetry {herm_gap:.3e})")
    if compute_vectors:
        values, vectors = scipy.linalg.eigh(dense, check_finite=False)
        norm = float(np.abs(values).max(initial=0.0))
        _check_residuals(dense, values, vectors, norm)
        return EigenSolution(values, vectors)
    values = scipy.linalg.eigvalsh(
        dense, overwrite_a=True, check_finite=False, driver="evr"
    )
    return EigenSolution(values, None)


def _joint_unitary_eigenbasis(
    ops: list[np.ndarray],
) -> tuple[np.ndarray, list[tuple[complex, ...]]]:
    """Shared eigenbasis of small commuting unitaries.

    Returns the basis as columns plus, per column, the tuple of rounded
    eigenvalues under each operator. Eigenvalue clusters are refined one
    operator at a time; within a cluster a QR pass restores
    orthonormality without mixing clusters, which is safe because the
    restricted operators stay normal.
    """
    n = ops[0].shape[0]
    U = np.eye(n, dtype=np.complex128)
    blocks = [np.arange(n)]
    for op in ops:
        refined = []
        for blk in blocks:
            sub = U[:, blk].conj().T @ op @ U[:, blk]
            w, V = np.linalg.eig(sub)
            key = np.round(w.real, 6) + 1j * np.round(w.imag, 6)
            order = np.lexsort((key.imag, key.real))
            key, V = key[order], V[:, order]
            V = np.linalg.qr(V)[0]
            U[:, blk] = U[:, blk] @ V
            start = 0
            for stop in range(1, blk.size + 1):
                if stop == blk.size or key[stop] != key[stop - 1]:
                    refined.append(blk[start:stop])
                    start = stop
        blocks = refined
    labels: list[tuple[complex, ...]] = [()] * n
    for blk in blocks:
        u = U[:, blk[0]]
        lab = tuple(
            complex(np.round(np.vdot(u, op @ u).real, 6))
            + 1j * complex(np.round(np.vdot(u, op @ u).imag, 6))
            for op in ops
        )
        for col in blk:
            labels[col] = lab
    return U, labels


def symmetry_block_values(mat, sym_ops: Sequence, tol: float = 1e-8) -> np.ndarray:
    """Full spectrum of a Hermitian matrix via commuting monomial unitaries.

    Each symmetry must be sparse with a single entry per column, the
    shape lattice translations take on an occupation basis. Basis states
    fall into orbits under the group; every orbit carries a joint
    eigenbasis of the restricted symmetries, and vectors sharing the
    same symmetry eigenvalues assemble into isometries whose
    compressions of ``mat`` are diagonalized densely. Splitting a large
    sector this way is far cheaper than one dense solve. The merged
    spectrum is validated against the trace and the Frobenius norm
    before being returned in ascending order.
    """
    mat = scipy.sparse.csr_matrix(mat)
    mat.sum_duplicates()
    dim = mat.shape[0]
    tgts, amps = [], []
    for op in sym_ops:
        csc = scipy.sparse.csc_matrix(op)
        if not np.all(np.diff(csc.indptr) == 1):
            raise ValueError("symmetry operator must have one entry per column")
        tgts.append(csc.indices.astype(np.int64))
        amps.append(csc.data.astype(np.complex128))

    parent = np.arange(dim, dtype=np.int64)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = int(parent[i])
        return i

    for tgt in tgts:
        for j in range(dim):
            a, b = find(j), find(int(tgt[j]))
            if a != b:
                parent[a] = b
    orbits: dict[int, list[int]] = {}
    for j in range(dim):
        orbits.setdefault(find(j), []).append(j)

    buckets: dict[tuple[complex, ...], list] = {}
    for members in orbits.values():
        idx = np.asarray(members, dtype=np.int64)
        pos = {int(g): p for p, g in enumerate(idx)}
        small = []
        for tgt, amp in zip(tgts, amps):
            S = np.zeros((idx.size, idx.size), dtype=np.complex128)
            for p, g in enumerate(idx):
                S[pos[int(tgt[g])], p] = amp[g]
            small.append(S)
        U, labels = _joint_unitary_eigenbasis(small)
        for col in range(idx.size):
            buckets.setdefault(labels[col], []).append((idx, U[:, col]))

    pieces = []
    for cols in buckets.values():
        rows = np.concatenate([idx for idx, _ in cols])
        col_ids = np.concatenate(
            [np.full(idx.size, c) for c, (idx, _) in enumerate(cols)]
        )
        data = np.concatenate([vec for _, vec in cols])
        Q = scipy.sparse.csc_matrix(
            (data, (rows, col_ids)), shape=(dim, len(cols))
        )
        block = (Q.getH() @ (mat @ Q)).toarray()
        block = 0.5 * (block + block.conj().T)
        pieces.append(scipy.linalg.eigvalsh(block, check_finite=False))
    values = np.sort(np.concatenate(pieces)) if pieces else np.zeros(0)

    if values.size != dim:
        raise AssertionError("block dimensions do not add up to the sector")
    scale = max(1.0, float(np.abs(mat.data).sum()) if mat.nnz else 0.0)
    trace = float(np.real(mat.diagonal().sum()))
    if abs(float(values.sum()) - trace) > tol * scale:
        raise AssertionError("blocked spectrum is inconsistent with the trace")
    frob2 = float((np.abs(mat.data) ** 2).sum()) if mat.nnz else 0.0
    if abs(float((values**2).sum()) - frob2) > tol * max(1.0, frob2):
        raise AssertionError("blocked spectrum is inconsistent with the norm")
    return values


def _operator_norm_bound(mat) -> float:
    if scipy.sparse.issparse(mat):
        return float(np.abs(mat).sum(axis=1).max())
    return float(np.abs(mat).sum(axis=1).max(initial=0.0))


def ground_manifold(
    mat,
    rel_tol: float = 1e-7,
    cap: int = DENSE_CAP,
    k0: int = 8,
) -> GroundManifold:
    """Ground energy, degeneracy, gap and an orthonormal manifold basis.

    Degeneracy groups eigenvalues within rel_tol times a norm bound of the
    operator. Matrices above the dense cap must be sparse and are handled
    iteratively, enlarging the Krylov block until the degenerate group is
    strictly inside it.
    """
    dim = mat.shape[0]
    norm = _operator_norm_bound(mat)
    tol = rel_tol * max(norm, 1e-300)
    if dim <= cap and (not scipy.sparse.issparse(mat) or dim <= 4096):
        sol = diagonalize(mat, compute_vectors=True, cap=cap)
        values, vectors = sol.values, sol.vectors
        deg = int(np.sum(values <= values[0] + tol))
        gap = float(values[deg] - values[0]) if deg < dim else np.inf
        basis = np.linalg.qr(vectors[:, :deg])[0]
        return GroundManifold(float(values[0]), deg, gap, basis)

    if not scipy.sparse.issparse(mat):
        raise ValueError(f"dimension {dim} exceeds dense cap {cap}")
    mat = mat.tocsr()
    k = min(max(k0, 2), dim - 1)
    rng = np.random.default_rng(7)
    v0 = rng.standard_normal(dim)
    while True:
        values, vectors = scipy.sparse.linalg.eigsh(mat, k=k, which="SA", v0=v0)
        order = np.argsort(values)
        values, vectors = values[order], vectors[:, order]
        deg = int(np.sum(values <= values[0] + tol))
        if deg < k or k == dim - 1:
            break
        k = min(2 * k, dim - 1)
    if deg >= k and k < dim - 1:
        raise AssertionError("degenerate group did not separate")
    gap = float(values[deg] - values[0]) if deg < values.shape[0] else np.inf
    basis = np.linalg.qr(vectors[:, :deg])[0]
    resid = mat @ basis - basis * values[:deg][None, :]
    worst = float(np.linalg.norm(resid, axis=0).max(initial=0.0))
    if worst > 1e-8 * max(norm, 1e-300):
        raise AssertionError(f"iterative eigenpair residual {worst:.3e} too large")
    return GroundManifold(float(values[0]), deg, gap, basis)
