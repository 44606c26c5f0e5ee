"""Spectrum and ground-manifold analysis of commuting Pauli Hamiltonians.

A Hamiltonian H = sum_i w_i H^(i) of N mutually commuting signed Pauli
strings has its spectrum encoded by GF(2) data: multiplicative relations
among the terms form the rows of C_H, each relation fixes a +-1 product
sign recorded in p_ph, and a vector v of term eigenvalue bits (bit 1 means
eigenvalue -1) is realized by an eigenspace exactly when C_H v = p_ph.
Every solution has the same eigenspace dimension 2^(n-N+d_r), so the whole
spectrum is the affine solution set v = s_E + span(A0 rows).

Terms are permuted internally so that C_H = (I | R) with pivot terms first;
the permutation is recorded in ``perm`` (canonical position -> original
index) and inverted whenever results leave the library. All block
identities quoted in docstrings hold in the canonical order.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np

from . import gf2, pauli
from ._backend import gray_min_energy

__all__ = [
    "CommutingHamiltonian",
    "EnergyVector",
    "GroundSearchResult",
    "build",
    "enumerate_spectrum",
    "ground_energy_search",
    "eigenspace_projector",
    "eigenspace_basis",
    "ground_sectors",
    "SPECTRUM_CAP",
]

SPECTRUM_CAP = 24


class EnergyVector(NamedTuple):
    """Term-eigenvalue bit vector (canonical term order) and its energy."""

    bits: np.ndarray
    energy: float


class GroundSearchResult(NamedTuple):
    vector: EnergyVector
    energy: float
    exact: bool
    degeneracy_sectors: int


class CommutingHamiltonian:
    """Immutable bundle of terms, weights and derived GF(2) structure.

    Attributes:
        n: qubit count.
        N: term count.
        terms: Hermitian-normalized signed Pauli terms, canonical order.
        weights: positive per-term weights (coefficient magnitudes).
        perm: perm[c] = original index of the term at canonical position c.
        C_H: d_r x N relation matrix in (I | R) form.
        p_ph: relation sign bits, one per C_H row.
        d_r: relation count.
        A0: (N-d_r) x N block (R^T | I); rows span the null space of C_H.
        B0: d_r x N block (I | 0).
        D_H: (N-d_r) x N block (0 | I).
        s_E: canonical particular solution of C_H v = p_ph.
    """

    def __init__(self, n, terms, weights, perm, C_H, p_ph, s_E):
        self.n = int(n)
        self.terms = tuple(terms)
        self.N = len(self.terms)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.perm = np.asarray(perm, dtype=np.int64)
        self.C_H = C_H
        self.p_ph = p_ph
        self.d_r = int(C_H.shape[0])
        self.s_E = s_E
        d_r, N = self.d_r, self.N
        R = C_H[:, d_r:]
        self.D_H = np.concatenate(
            [np.zeros((N - d_r, d_r), dtype=np.uint8), np.eye(N - d_r, dtype=np.uint8)],
            axis=1,
        )
        self.A0 = np.concatenate([R.T, np.eye(N - d_r, dtype=np.uint8)], axis=1)
        self.B0 = np.concatenate(
            [np.eye(d_r, dtype=np.uint8), np.zeros((d_r, N - d_r), dtype=np.uint8)],
            axis=1,
        )
        for arr in (self.weights, self.perm, self.C_H, self.p_ph, self.s_E,
                    self.D_H, self.A0, self.B0):
            arr.flags.writeable = False

    # -- basic queries ----------------------------------------------------

    def energy_of(self, bits: np.ndarray) -> float:
        """Energy sum_i w_i (-1)^bit_i of a term-eigenvalue bit vector."""
        b = np.asarray(bits, dtype=np.float64)
        return float(np.sum(self.weights * (1.0 - 2.0 * b)))

    def is_feasible(self, bits: np.ndarray) -> bool:
        """True when C_H bits = p_ph, i.e. some eigenspace realizes bits."""
        return bool(np.array_equal(gf2.matmul(self.C_H, gf2.asbits(bits)), self.p_ph))

    def multiplicity(self) -> int:
        """Dimension of every realized eigenspace, 2^(n-N+d_r)."""
        return 1 << (self.n - self.N + self.d_r)

    def to_original_order(self, bits: np.ndarray) -> np.ndarray:
        """Map a canonical-order bit vector back to the input term order."""
        out = np.empty(self.N, dtype=np.uint8)
        out[self.perm] = np.asarray(bits, dtype=np.uint8)
        return out

    def from_original_order(self, bits: np.ndarray) -> np.ndarray:
        return gf2.asbits(bits)[self.perm]

    def original_terms(self) -> list[pauli.PauliOp]:
        """Terms in the order they were supplied to build."""
        out: list = [None] * self.N
        for c, orig in enumerate(self.perm):
            out[int(orig)] = self.terms[c]
        return out

    def original_weights(self) -> np.ndarray:
        out = np.empty(self.N, dtype=np.float64)
        out[self.perm] = self.weights
        return out

    def interaction_range(self) -> int:
        """Largest term support size; used as the default locality scale."""
        return max(len(t.support()) for t in self.terms)

    def all_z_type(self) -> bool:
        return all(not np.any(t.x) for t in self.terms)

    def materialize(self, cap: int = pauli.MATERIALIZE_CAP) -> np.ndarray:
        """Dense 2^n x 2^n matrix sum_i w_i H^(i)."""
        if self.all_z_type():
            return np.diag(self.diagonal()).astype(np.complex128)
        mat = np.zeros((1 << self.n, 1 << self.n), dtype=np.complex128)
        for w, t in zip(self.weights, self.terms):
            mat += w * pauli.materialize(t, cap=cap)
        return mat

    def diagonal(self) -> np.ndarray:
        """Diagonal of the Hamiltonian when every term is Z-type."""
        if not self.all_z_type():
            raise ValueError("Hamiltonian has X components; no diagonal form")
        d = np.zeros(1 << self.n, dtype=np.float64)
        for w, t in zip(self.weights, self.terms):
            d += w * pauli.materialize_diagonal(t)
        return d

    def to_term_dicts(self) -> list[dict]:
        """JSON-ready [{pauli, coeff}] rows in the original term order."""
        rows = []
        for t, w in zip(self.original_terms(), self.original_weights()):
            sign = t.sign()
            rows.append({"pauli": t.with_sign(1).to_string(), "coeff": sign * float(w)})
        return rows


def from_term_dicts(rows: Iterable[dict]) -> CommutingHamiltonian:
    """Build from JSON-style rows [{"pauli": str, "coeff": float}, ...]."""
    terms, coeffs = [], []
    for i, row in enumerate(rows):
        if not isinstance(row, dict) or "pauli" not in row:
            raise ValueError(f"row {i}: expected an object with a 'pauli' field")
        terms.append(pauli.from_string(str(row["pauli"])))
        coeffs.append(float(row.get("coeff", 1.0)))
    return build(terms, coeffs)


def load_hamiltonian(path) -> CommutingHamiltonian:
    """Read a Hamiltonian from a JSON file of {pauli, coeff} rows."""
    import json

    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "terms" in data:
        data = data["terms"]
    if not isinstance(data, list):
        raise ValueError("expected a JSON list of {pauli, coeff} rows")
    return from_term_dicts(data)


def dump_hamiltonian(h: CommutingHamiltonian, path) -> None:
    import json

    with open(path, "w") as fh:
        json.dump(h.to_term_dicts(), fh, indent=1)
        fh.write("\n")


def build(terms: Iterable[pauli.PauliOp], coeffs=None) -> CommutingHamiltonian:
    """Construct the GF(2) relation structure for a commuting term list.

    Args:
        terms: Hermitian Pauli operators (signs allowed in their phases).
        coeffs: optional real coefficients; the sign is absorbed into the
            term and the magnitude becomes the weight. Default all 1.

    Raises:
        ValueError: on an empty list, mismatched sizes, a non-Hermitian or
            zero-coefficient term, or a non-commuting pair (named).
    """
    term_list = list(terms)
    if not term_list:
        raise ValueError("empty term list")
    n = term_list[0].n
    if coeffs is None:
        coeffs = [1.0] * len(term_list)
    coeffs = [float(c) for c in coeffs]
    if len(coeffs) != len(term_list):
        raise ValueError(
            f"{len(coeffs)} coefficients for {len(term_list)} terms"
        )
    normalized = []
    weights = []
    for i, (t, c) in enumerate(zip(term_list, coeffs)):
        if t.n != n:
            raise ValueError(f"term {i} acts on {t.n} qubits, expected {n}")
        if not t.is_hermitian():
            raise ValueError(f"term {i} is not Hermitian")
        if c == 0.0:
            raise ValueError(f"term {i} has zero coefficient")
        normalized.append(t.with_sign(t.sign() * (1 if c > 0 else -1)))
        weights.append(abs(c))
    for i in range(len(normalized)):
        for j in range(i + 1, len(normalized)):
            if not pauli.commutes(normalized[i], normalized[j]):
                raise ValueError(
                    f"terms {i} and {j} do not commute: "
                    f"{normalized[i].to_string()} vs {normalized[j].to_string()}"
                )

    N = len(normalized)
    M_P = np.stack([t.symplectic for t in normalized])  # N x 2n
    relation_basis = gf2.right_null_space(M_P.T)
    if relation_basis:
        reduced, d_r, pivots = gf2.row_reduce(np.stack(relation_basis))
        reduced = reduced[:d_r]
    else:
        reduced = np.zeros((0, N), dtype=np.uint8)
        d_r, pivots = 0, []
    nonpivots = [c for c in range(N) if c not in set(pivots)]
    perm = np.array(list(pivots) + nonpivots, dtype=np.int64)
    C_H = reduced[:, perm] if d_r else np.zeros((0, N), dtype=np.uint8)

    canon_terms = [normalized[int(i)] for i in perm]
    canon_weights = np.array([weights[int(i)] for i in perm])

    # Relation signs from explicit Pauli products; never inferred.
    p_ph = np.zeros(d_r, dtype=np.uint8)
    for r in range(d_r):
        prod = pauli.identity(n)
        for i in np.nonzero(C_H[r])[0]:
            prod = pauli.multiply(prod, canon_terms[int(i)])
        if not prod.is_identity_string():
            raise AssertionError("relation row does not multiply to identity")
        p_ph[r] = 0 if prod.sign() == 1 else 1

    s_E = gf2.solve(C_H, p_ph) if d_r else np.zeros(N, dtype=np.uint8)
    if s_E is None:
        raise AssertionError("energy equation infeasible; relation data corrupt")

    h = CommutingHamiltonian(n, canon_terms, canon_weights, perm, C_H, p_ph, s_E)
    # Block decomposition identity: B0^T C_H + A0^T D_H = 1.
    recon = gf2.matmul(h.B0.T, h.C_H) ^ gf2.matmul(h.A0.T, h.D_H)
    if not np.array_equal(recon, np.eye(N, dtype=np.uint8)):
        raise AssertionError("block decomposition identity failed")
    return h


def _rows_to_masks(rows: np.ndarray) -> np.ndarray:
    weights = (np.uint64(1) << np.arange(rows.shape[1], dtype=np.uint64))
    return (rows.astype(np.uint64) * weights).sum(axis=1).astype(np.uint64)


def _mask_to_bits(mask: int, n_terms: int) -> np.ndarray:
    return ((int(mask) >> np.arange(n_terms)) & 1).astype(np.uint8)


def enumerate_spectrum(
    h: CommutingHamiltonian, cap: int = SPECTRUM_CAP
) -> list[tuple[EnergyVector, int]]:
    """All 2^(N-d_r) energy vectors with their common multiplicity.

    Enumeration follows the canonical Gray-code order of the free
    coordinates, so output order is deterministic and chunk merges are
    trivially canonical.

    Raises:
        ValueError: when N - d_r exceeds ``cap``; use ground_energy_search
            for the optimum instead of a full sweep.
    """
    free = h.N - h.d_r
    if free > cap:
        raise ValueError(
            f"spectrum size 2^{free} exceeds cap 2^{cap}; "
            "use ground_energy_search instead of full enumeration"
        )
    mult = h.multiplicity()
    out = []
    chunk = 1 << 16
    total = 1 << free
    shifts = np.arange(free, dtype=np.uint64)
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        idx = np.arange(start, stop, dtype=np.uint64)
        gray = idx ^ (idx >> np.uint64(1))
        xbits = ((gray[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)
        v = (h.s_E[None, :] ^ gf2.matmul(xbits, h.A0))
        energies = (h.weights[None, :] * (1.0 - 2.0 * v)).sum(axis=1)
        for row, e in zip(v, energies):
            out.append((EnergyVector(row.copy(), float(e)), mult))
    return out


def ground_energy_search(
    h: CommutingHamiltonian,
    budget: int = 10_000,
    seed: int | None = 0,
    cap: int = SPECTRUM_CAP,
) -> GroundSearchResult:
    """Lowest-energy vector of the affine solution set.

    When the solution set fits the enumeration cap (and N <= 64) the sweep
    is exhaustive and the result is flagged exact; otherwise a seeded
    randomized local search over XOR moves runs for ``budget`` steps and
    the best vector found is returned unflagged.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    free = h.N - h.d_r
    if free <= cap and h.N <= 64:
        masks = _rows_to_masks(h.A0)
        s_mask = int(_rows_to_masks(h.s_E[None, :])[0])
        best_e, best_mask, n_best = gray_min_energy(masks, s_mask, h.weights)
        bits = _mask_to_bits(best_mask, h.N)
        return GroundSearchResult(EnergyVector(bits, best_e), best_e, True, n_best)

    rng = np.random.default_rng(seed)
    v = h.s_E.copy()
    e = h.energy_of(v)
    best_v, best_e = v.copy(), e
    for _ in range(budget):
        if rng.random() < 0.15:
            # occasional multi-row jump to escape plateaus
            x = rng.integers(0, 2, size=free, dtype=np.uint8)
            cand = best_v ^ gf2.matmul(x, h.A0)
        else:
            r = int(rng.integers(free))
            cand = v ^ h.A0[r]
        ce = h.energy_of(cand)
        if ce <= e:
            v, e = cand, ce
            if ce < best_e:
                best_v, best_e = cand.copy(), ce
    return GroundSearchResult(EnergyVector(best_v, best_e), best_e, False, 0)


def eigenspace_projector(
    h: CommutingHamiltonian, bits: np.ndarray, cap: int = pauli.MATERIALIZE_CAP
) -> np.ndarray:
    """Dense projector (1/2^N) prod_i (1 + (-1)^bit_i H^(i)).

    Raises:
        ValueError: when the bit vector violates the energy equation (the
            projector would be zero) or the qubit count exceeds the cap.
    """
    bits = gf2.asbits(bits)
    if not h.is_feasible(bits):
        raise ValueError("bit vector violates C_H v = p_ph; empty eigenspace")
    if h.n > cap:
        raise ValueError(f"{h.n} qubits exceeds materialization cap {cap}")
    if h.all_z_type():
        return np.diag(_diagonal_indicator(h, bits)).astype(np.complex128)
    dim = 1 << h.n
    proj = np.eye(dim, dtype=np.complex128)
    for b, t in zip(bits, h.terms):
        sgn = 1.0 if b == 0 else -1.0
        proj = proj @ ((np.eye(dim) + sgn * pauli.materialize(t, cap=cap)) / 2.0)
    return proj


def _diagonal_indicator(h: CommutingHamiltonian, bits: np.ndarray) -> np.ndarray:
    ind = np.ones(1 << h.n, dtype=np.float64)
    for b, t in zip(bits, h.terms):
        sgn = 1.0 if b == 0 else -1.0
        ind *= (1.0 + sgn * pauli.materialize_diagonal(t)) / 2.0
    return ind


def eigenspace_basis(
    h: CommutingHamiltonian, bits: np.ndarray, cap: int = pauli.MATERIALIZE_CAP
) -> np.ndarray:
    """Orthonormal basis (columns) of the eigenspace selected by ``bits``.

    Z-type Hamiltonians use the classical-configuration fast path; anything
    else goes through the dense projector.
    """
    bits = gf2.asbits(bits)
    if not h.is_feasible(bits):
        raise ValueError("bit vector violates C_H v = p_ph; empty eigenspace")
    mult = h.multiplicity()
    if h.all_z_type():
        ind = _diagonal_indicator(h, bits)
        cols = np.nonzero(ind > 0.5)[0]
        if cols.size != mult:
            raise AssertionError("eigenspace dimension mismatch on diagonal path")
        basis = np.zeros((1 << h.n, mult))
        basis[cols, np.arange(mult)] = 1.0
        return basis
    proj = eigenspace_projector(h, bits, cap=cap)
    vals, vecs = np.linalg.eigh(proj)
    keep = vals > 0.5
    if int(keep.sum()) != mult:
        raise AssertionError("eigenspace dimension mismatch")
    return vecs[:, keep]


def ground_sectors(
    h: CommutingHamiltonian, tol: float = 1e-9, cap: int = SPECTRUM_CAP
) -> tuple[float, list[np.ndarray]]:
    """Ground energy and every bit vector achieving it (exhaustive sweep)."""
    spectrum = enumerate_spectrum(h, cap=cap)
    e_min = min(ev.energy for ev, _ in spectrum)
    sectors = [ev.bits for ev, _ in spectrum if ev.energy <= e_min + tol]
    return e_min, sectors


def ground_manifold_states(
    h: CommutingHamiltonian, tol: float = 1e-9
) -> tuple[float, np.ndarray]:
    """Ground energy and an orthonormal column basis of the GS manifold."""
    e_min, sectors = ground_sectors(h, tol=tol)
    blocks = [eigenspace_basis(h, v) for v in sectors]
    return e_min, np.concatenate(blocks, axis=1)
