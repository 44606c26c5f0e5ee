"""Reference model builders.

Qubit models come back as commuting Pauli Hamiltonians or dense spin
matrices; fermionic models come back as ladder-operator term lists with a
preferred symmetry sector. All randomness flows through a seed argument
and numpy's default generator, so every disorder realization is
bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from . import cph, ed, pauli
from .ed import FermionTerm
from .errors import ConfigError

__all__ = [
    "SpinModel",
    "FermionModel",
    "build_ising",
    "build_heisenberg",
    "build_syk",
    "build_fermi_hubbard",
    "fermi_hubbard_translations",
    "random_commuting",
    "spin_matrices",
    "build_from_config",
]


@dataclass(frozen=True)
class SpinModel:
    """Dense qudit-chain Hamiltonian with uniform local dimension."""

    n_sites: int
    local_dim: int
    matrix: np.ndarray
    label: str
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FermionModel:
    """Ladder-operator Hamiltonian with mode count and sector hints."""

    m: int
    terms: list
    label: str
    meta: dict = field(default_factory=dict)

    def matrix(self, basis: np.ndarray | None = None):
        return ed.fermion_matrix(self.m, self.terms, basis=basis)


# -- Ising ring -----------------------------------------------------------


def build_ising(
    n: int, coupling: float = 1.0, periodic: bool = True
) -> cph.CommutingHamiltonian:
    """ZZ chain or ring: coupling * sum_i Z_i Z_{i+1}.

    Positive coupling frustrates odd rings (antiferromagnetic).
    """
    if n < 2:
        raise ValueError("need at least 2 qubits")
    bonds = [(i, i + 1) for i in range(n - 1)]
    if periodic and n > 2:
        bonds.append((n - 1, 0))
    terms = []
    for i, j in bonds:
        z = np.zeros(n, dtype=np.uint8)
        z[i] = z[j] = 1
        terms.append(pauli.PauliOp(np.zeros(n, dtype=np.uint8), z, 0))
    return cph.build(terms, [coupling] * len(bonds))


# -- Heisenberg chain -----------------------------------------------------


def spin_matrices(s: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Sx, Sy, Sz) in the standard ladder construction, dim 2s+1."""
    twice = round(2 * s)
    if twice < 1 or abs(2 * s - twice) > 1e-12:
        raise ValueError(f"spin must be a positive half-integer, got {s}")
    d = twice + 1
    mz = s - np.arange(d)
    sz = np.diag(mz).astype(np.complex128)
    # raising elements <m+1|S+|m> = sqrt(s(s+1) - m(m+1))
    off = np.sqrt(s * (s + 1) - mz[1:] * (mz[1:] + 1))
    sp = np.zeros((d, d), dtype=np.complex128)
    sp[np.arange(d - 1), np.arange(1, d)] = off
    sx = (sp + sp.conj().T) / 2
    sy = (sp - sp.conj().T) / 2j
    return sx, sy, sz


def _kron_chain(ops: list[np.ndarray]) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def _chain_symmetry_ops(n: int, d: int, s: float, periodic: bool) -> list:
    """Commuting symmetry operators that pin down degenerate eigenbases.

    Returns the lattice shift (rings) or site reflection (open chains)
    together with total Sz, as sparse matrices on the product space.
    Site 0 occupies the most significant base-d digit of the state index,
    matching the Kronecker order used by the builders.
    """
    dim = d**n
    idx = np.arange(dim)
    place = d ** np.arange(n - 1, -1, -1)
    digits = (idx[:, None] // place[None, :]) % d
    sz = sparse.diags((s - digits).sum(axis=1).astype(np.float64))
    if periodic and n > 2:
        moved = (idx % place[0]) * d + idx // place[0]
    else:
        moved = (digits[:, ::-1] * place[None, :]).sum(axis=1)
    perm = sparse.csr_matrix(
        (np.ones(dim), (moved, idx)), shape=(dim, dim)
    )
    return [perm, sz]


def build_heisenberg(
    n: int, spin: float = 0.5, coupling: float = 1.0, periodic: bool = True
) -> SpinModel:
    """Isotropic exchange ring: coupling * sum_i S_i . S_{i+1}."""
    if n < 2:
        raise ValueError("need at least 2 sites")
    sx, sy, sz = spin_matrices(spin)
    d = sx.shape[0]
    if d**n > 1 << 14:
        raise ValueError(f"Hilbert dimension {d**n} too large to materialize")
    bonds = [(i, i + 1) for i in range(n - 1)]
    if periodic and n > 2:
        bonds.append((n - 1, 0))
    eye = np.eye(d, dtype=np.complex128)
    mat = np.zeros((d**n, d**n), dtype=np.complex128)
    for i, j in bonds:
        for op in (sx, sy, sz):
            chain = [eye] * n
            chain[i] = op
            chain[j] = op.copy()
            mat += coupling * _kron_chain(chain)
    meta = {
        "spin": spin, "coupling": coupling, "periodic": periodic,
        "basis_ops": _chain_symmetry_ops(n, d, spin, periodic),
    }
    return SpinModel(n, d, mat, "heisenberg", meta)


# -- SYK ------------------------------------------------------------------


def _syk_dirac_terms(n_modes: int, rng: np.random.Generator, mu: float):
    """Two-body random couplings, antisymmetric in i<->j and k<->l.

    Independent entries are sampled for index pairs (ij) <= (kl) in
    lexicographic order; the conjugate block follows from Hermiticity.
    Diagonal entries (ij) == (kl) are real. Off-diagonal real and
    imaginary parts are N(0, 1/2) so every entry has unit variance.
    """
    pairs = [(i, j) for i in range(n_modes) for j in range(i + 1, n_modes)]
    npair = len(pairs)
    J = np.zeros((npair, npair), dtype=np.complex128)
    for a in range(npair):
        J[a, a] = rng.standard_normal()
        for b in range(a + 1, npair):
            re, im = rng.standard_normal(2)
            J[a, b] = complex(re, im) / np.sqrt(2)
            J[b, a] = np.conj(J[a, b])
    pref = 4.0 / (2 * n_modes) ** 1.5
    terms = []
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            c = pref * J[a, b]
            if c == 0:
                continue
            terms.append(
                FermionTerm(c, ((i, True), (j, True), (k, False), (l, False)))
            )
    if mu != 0.0:
        for i in range(n_modes):
            terms.append(FermionTerm(-mu, ((i, True), (i, False))))
    return terms, J


def _majorana_factor(k: int) -> list[tuple[complex, int, bool]]:
    j = k // 2
    if k % 2 == 0:
        return [(1.0 + 0j, j, False), (1.0 + 0j, j, True)]
    return [(-1j, j, False), (1j, j, True)]


def _syk_majorana_terms(n_majorana: int, rng: np.random.Generator):
    """Four-fermion products of Majorana operators, real N(0,1) couplings."""
    quads = [
        (i, j, k, l)
        for i in range(n_majorana)
        for j in range(i + 1, n_majorana)
        for k in range(j + 1, n_majorana)
        for l in range(k + 1, n_majorana)
    ]
    J = rng.standard_normal(len(quads))
    pref = 1.0 / n_majorana**1.5
    terms = []
    for c, quad in zip(J, quads):
        factors = [_majorana_factor(k) for k in quad]
        terms.extend(ed.expand_linear_products(factors, prefactor=pref * c))
    return terms, J


def build_syk(
    n: int,
    variant: str = "dirac",
    seed: int = 0,
    mu: float = 0.0,
) -> FermionModel:
    """All-to-all random two-body fermion model.

    For the complex-fermion variant ``n`` counts Dirac modes (capped at
    15) and the natural sector is half filling floor(n/2). The real
    variant counts Majorana operators (capped at 12) living on
    ceil(n/2) Dirac modes; particle number is not conserved there, only
    parity, so the full space is the working arena.
    """
    rng = np.random.default_rng(seed)
    if variant == "dirac":
        if not 2 <= n <= 15:
            raise ValueError(f"Dirac mode count {n} outside [2, 15]")
        terms, J = _syk_dirac_terms(n, rng, mu)
        meta = {
            "variant": variant, "seed": seed, "mu": mu, "couplings": J,
            "half_filling": n // 2,
        }
        return FermionModel(n, terms, "syk", meta)
    if variant == "majorana":
        if not 4 <= n <= 12:
            raise ValueError(f"Majorana count {n} outside [4, 12]")
        terms, J = _syk_majorana_terms(n, rng)
        meta = {"variant": variant, "seed": seed, "couplings": J}
        return FermionModel((n + 1) // 2, terms, "syk", meta)
    raise ValueError(f"unknown variant {variant!r}; use 'dirac' or 'majorana'")


# -- Fermi-Hubbard --------------------------------------------------------


def build_fermi_hubbard(
    lx: int = 3,
    ly: int = 3,
    t: float = 1.0,
    u: float = 4.0,
    periodic: bool = True,
) -> FermionModel:
    """Square-lattice Hubbard model, spin-major mode layout.

    Mode index = spin * lx * ly + site with site = x + lx * y; hopping is
    -t on nearest-neighbor bonds (wrapped when periodic), interaction
    +u n_up n_down per site.
    """
    sites = lx * ly
    if sites < 2:
        raise ValueError("need at least 2 sites")
    bonds = set()
    for y in range(ly):
        for x in range(lx):
            s = x + lx * y
            if x + 1 < lx:
                bonds.add((s, s + 1))
            elif periodic and lx > 2:
                bonds.add((min(s, lx * y), max(s, lx * y)))
            if y + 1 < ly:
                bonds.add((s, s + lx))
            elif periodic and ly > 2:
                bonds.add((min(s, x), max(s, x)))
    terms = []
    for a, b in sorted(bonds):
        for spin in (0, 1):
            ma, mb = spin * sites + a, spin * sites + b
            terms.append(FermionTerm(-t, ((ma, True), (mb, False))))
            terms.append(FermionTerm(-t, ((mb, True), (ma, False))))
    for s in range(sites):
        up, down = s, sites + s
        terms.append(
            FermionTerm(u, ((up, True), (up, False), (down, True), (down, False)))
        )
    meta = {
        "lx": lx, "ly": ly, "t": t, "u": u, "periodic": periodic,
        "sites": sites, "bonds": sorted(bonds),
    }
    return FermionModel(2 * sites, terms, "fermi_hubbard", meta)


def _mode_permutation_matrix(
    m: int, perm: np.ndarray, basis: np.ndarray
) -> sparse.csr_matrix:
    """Signed permutation matrix of a mode relabeling on a sector basis.

    The image of an occupation state carries the permuted pattern times
    the parity of reordering the moved creation operators back to
    ascending mode order, which keeps the action consistent with the
    basis-state sign convention used by the matrix builders.
    """
    basis = np.asarray(basis, dtype=np.int64)
    dim = basis.shape[0]
    occ = ((basis[:, None] >> (m - 1 - np.arange(m))[None, :]) & 1).astype(bool)
    k_counts = occ.sum(axis=1)
    rows = np.empty(dim, dtype=np.int64)
    data = np.ones(dim, dtype=np.float64)
    for k in np.unique(k_counts):
        sel = np.nonzero(k_counts == k)[0]
        if k == 0:
            rows[sel] = np.searchsorted(basis, 0)
            continue
        modes = np.nonzero(occ[sel])[1].reshape(sel.size, int(k))
        imgs = perm[modes]
        inv = np.zeros(sel.size, dtype=np.int64)
        for a in range(int(k)):
            for b in range(a + 1, int(k)):
                inv += (imgs[:, a] > imgs[:, b]).astype(np.int64)
        new_index = (np.int64(1) << (m - 1 - imgs)).sum(axis=1)
        pos = np.searchsorted(basis, new_index)
        pos = np.clip(pos, 0, dim - 1)
        if not np.array_equal(basis[pos], new_index):
            raise ValueError("sector basis is not closed under the permutation")
        rows[sel] = pos
        data[sel] = 1.0 - 2.0 * (inv % 2)
    return sparse.csr_matrix(
        (data, (rows, np.arange(dim))), shape=(dim, dim)
    )


def fermi_hubbard_translations(
    lx: int, ly: int, basis: np.ndarray
) -> list[sparse.csr_matrix]:
    """Unit lattice shifts along x and y on a spin-sector basis.

    Both act within each spin species with the spin-major mode layout of
    build_fermi_hubbard and commute with the periodic Hamiltonian; use
    them to split a sector into joint translation eigenblocks.
    """
    sites = lx * ly
    s = np.arange(sites)
    x, y = s % lx, s // lx
    out = []
    for dx, dy in ((1, 0), (0, 1)):
        tgt = (x + dx) % lx + lx * ((y + dy) % ly)
        perm = np.concatenate([tgt, sites + tgt])
        out.append(_mode_permutation_matrix(2 * sites, perm, basis))
    return out


# -- random commuting sets ------------------------------------------------


def random_commuting(
    n: int, n_terms: int, seed: int = 0, coeff_range: tuple[float, float] = (0.5, 1.5)
) -> cph.CommutingHamiltonian:
    """Random mutually commuting signed Pauli set with random weights.

    Draws candidates by rejection; every 500 consecutive rejections it
    falls back to multiplying a random subset of accepted terms, which
    commutes by construction and enriches the relation structure.
    """
    rng = np.random.default_rng(seed)
    accepted: list[pauli.PauliOp] = []
    stall = 0
    while len(accepted) < n_terms:
        if stall >= 500 and accepted:
            mask = rng.integers(0, 2, size=len(accepted))
            prod = pauli.identity(n)
            for pick, t in zip(mask, accepted):
                if pick:
                    prod = pauli.multiply(prod, t)
            cand = prod.with_sign(1 if rng.random() < 0.5 else -1)
        else:
            x = rng.integers(0, 2, size=n, dtype=np.uint8)
            z = rng.integers(0, 2, size=n, dtype=np.uint8)
            phase = int(x @ z) % 2
            cand = pauli.PauliOp(x, z, phase)
            cand = cand.with_sign(1 if rng.random() < 0.5 else -1)
        if cand.is_identity_string():
            stall += 1
            continue
        if all(pauli.commutes(cand, t) for t in accepted):
            accepted.append(cand)
            stall = 0
        else:
            stall += 1
    coeffs = rng.uniform(*coeff_range, size=n_terms)
    signs = np.where(rng.random(n_terms) < 0.5, -1.0, 1.0)
    return cph.build(accepted, coeffs * signs)


# -- config parsing -------------------------------------------------------

_KINDS = ("ising", "heisenberg", "syk", "fermi_hubbard", "commuting_pauli")


def _need(params: dict, path: str, key: str, kinds, default=None):
    if key not in params:
        if default is not None:
            return default
        raise ConfigError(f"{path}.{key}", "missing required field")
    val = params[key]
    if not isinstance(val, kinds):
        raise ConfigError(f"{path}.{key}", f"expected {kinds}, got {type(val).__name__}")
    return val


def build_from_config(cfg: dict, path: str = "model"):
    """Instantiate a model from a JSON-style dict.

    Expected shape: {"kind": <name>, "params": {...}}. Raises ConfigError
    with the offending field path on any malformed input.
    """
    if not isinstance(cfg, dict):
        raise ConfigError(path, "expected an object")
    kind = _need(cfg, path, "kind", str)
    if kind not in _KINDS:
        raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}; one of {_KINDS}")
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{path}.params", "expected an object")
    p = f"{path}.params"
    if kind == "ising":
        n = _need(params, path, "n", int)
        return build_ising(
            n,
            coupling=float(_need(params, path, "coupling", (int, float), 1.0)),
            periodic=bool(params.get("periodic", True)),
        )
    if kind == "heisenberg":
        n = _need(params, path, "n", int)
        return build_heisenberg(
            n,
            spin=float(_need(params, path, "spin", (int, float), 0.5)),
            coupling=float(_need(params, path, "coupling", (int, float), 1.0)),
            periodic=bool(params.get("periodic", True)),
        )
    if kind == "syk":
        n = _need(params, path, "n", int)
        return build_syk(
            n,
            variant=_need(params, path, "variant", str, "dirac"),
            seed=int(_need(params, path, "seed", int, 0)),
            mu=float(_need(params, path, "mu", (int, float), 0.0)),
        )
    if kind == "fermi_hubbard":
        return build_fermi_hubbard(
            lx=int(_need(params, path, "lx", int, 3)),
            ly=int(_need(params, path, "ly", int, 3)),
            t=float(_need(params, path, "t", (int, float), 1.0)),
            u=float(_need(params, path, "u", (int, float), 4.0)),
            periodic=bool(params.get("periodic", True)),
        )
    rows = _need(params, path, "terms", list)
    if not rows:
        raise ConfigError(f"{p}.terms", "empty term list")
    try:
        return cph.from_term_dicts(rows)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"{p}.terms", str(exc)) from exc
