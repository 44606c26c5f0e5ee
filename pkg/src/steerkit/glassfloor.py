"""Reachability floors for models that passive local steering cannot solve.

The central quantity is the population bound p. For a single target state
it is the smallest eigenvalue of a kept-region reduced density matrix,
minimized over the allowed regions; 1 - p caps the ground-space
population of any state that keeps a strict local projector invariant.
For a degenerate manifold the bound is realized on an orthonormal basis
of the manifold: a region contributes zero exactly when the joint local
support of the whole manifold is rank deficient there (a strict local
projector then fixes every ground state), and otherwise contributes the
smallest nonvanishing reduced eigenvalue among the basis states. Basis
states can be rank deficient for purely geometric reasons whenever a
region outgrows its complement, so structural zeros are excluded by a
support tolerance; genuinely small weights stay in, since discarding
them would misreport a nearly-product state as exactly product.

The basis realization is not basis independent. Callers may supply
commuting symmetry operators (``basis_ops``); the manifold basis is then
fixed deterministically by simultaneous block diagonalization of their
compressions. A second, independent route is always reported alongside:
the supremum of manifold overlap over strict local projectors, computed
by alternating eigenvector descent (or shifted power iteration for a
single state). For a single full-rank state both routes target the same
number and must agree; for degenerate manifolds the projector supremum
can be strictly larger (it sees every unit combination, not just the
basis), so the report carries both values and their gap instead of
asserting equality.

From p follow three floors: fidelity at most 1 - p, energy at least
E_GS + p * gap, and an effective-temperature lower bound from matching
the thermal ground weight to 1 - p.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import analysis

__all__ = [
    "RegionValue",
    "PopulationBound",
    "SurrogateChoice",
    "SurrogateState",
    "TemperatureResult",
    "GlassFloorReport",
    "canonical_manifold_basis",
    "compute_p",
    "choose_surrogate_region",
    "presumed_surrogate",
    "energy_floor",
    "fidelity_bound",
    "temperature_floor",
    "run_glass_floor",
]

CROSS_TOL = 5e-4
SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class RegionValue:
    region: analysis.Region
    value: float
    cross_value: float | None
    support_rank: int
    dim: int
    state_index: int | None
    certificate: str | None


@dataclass(frozen=True)
class PopulationBound:
    p: float
    cross_p: float | None
    region_index: int
    rows: list
    cross_gap: float | None
    full_rank: bool
    degenerate: bool
    basis_blocks: tuple


@dataclass(frozen=True)
class SurrogateChoice:
    region_index: int
    region: analysis.Region
    value: float
    tied: bool
    full_rank: bool


@dataclass(frozen=True)
class SurrogateState:
    state: np.ndarray | None
    fidelity: float
    removed_weight: float
    flagged: bool
    note: str


@dataclass(frozen=True)
class TemperatureResult:
    temperature: float
    beta: float
    ground_weight_target: float
    degeneracy: int
    dimension: int
    regime: str


def _default_front(dims):
    def front(vec, sites):
        return analysis.region_matrix(vec, sites, dims)

    return front


def _coefficient_starts(d: int, rng: np.random.Generator, n_random: int):
    starts = [np.eye(d, dtype=np.complex128)[:, a] for a in range(d)]
    for a in range(d):
        for b in range(a + 1, d):
            for ph in (1.0, -1.0, 1j, -1j):
                c = np.zeros(d, dtype=np.complex128)
                c[a] = 1.0
                c[b] = ph
                starts.append(c / np.sqrt(2))
    if len(starts) > 24:
        starts = starts[:24]
    for _ in range(n_random):
        c = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        starts.append(c / np.linalg.norm(c))
    return starts


def _power_lambda_min(rho: np.ndarray, iters: int = 500) -> float:
    """Smallest eigenvalue by power iteration on a spectral shift."""
    dim = rho.shape[0]
    shift = float(np.trace(np.abs(rho)).real) + 1.0
    B = shift * np.eye(dim) - rho
    rng = np.random.default_rng(11)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = B @ v
        lam = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw < 1e-300:
            break
        v = w / nw
    return shift - lam


def _alternating_region_value(mats, rng, n_random, iters: int = 80) -> float:
    """min over unit manifold combinations of the local smallest eigenvalue.

    This realizes the supremum of manifold overlap over strict local
    projectors: the optimal projector for a fixed state discards the
    bottom eigenvector of its reduced density matrix, and the optimal
    state for a fixed discarded vector is the bottom eigenvector of the
    manifold Gram matrix. The two exact partial minimizations alternate
    from several deterministic and seeded starts.
    """
    d = len(mats)
    if d == 1:
        return _power_lambda_min(mats[0] @ mats[0].conj().T)
    best = np.inf
    for c in _coefficient_starts(d, rng, n_random):
        val_prev = np.inf
        for _ in range(iters):
            W = sum(ci * Wi for ci, Wi in zip(c, mats))
            rho = W @ W.conj().T
            vals, vecs = np.linalg.eigh(rho)
            v = vecs[:, 0]
            rows = np.stack([np.conj(v) @ Wi for Wi in mats])
            G = np.conj(rows) @ rows.T
            gvals, gvecs = np.linalg.eigh(G)
            c = gvecs[:, 0]
            val = float(gvals[0])
            if abs(val_prev - val) < 1e-14:
                break
            val_prev = val
        best = min(best, val_prev)
    return max(best, 0.0) if best > -1e-12 else float(best)


def canonical_manifold_basis(
    vectors: np.ndarray,
    basis_ops=None,
    cluster_tol: float = 1e-8,
) -> tuple[np.ndarray, tuple]:
    """Deterministic orthonormal basis of a degenerate manifold.

    Orthonormalizes the input and, when ``basis_ops`` are given,
    simultaneously block diagonalizes their compressions onto the
    manifold: each operator must map the manifold to itself, its
    compression is diagonalized inside the current blocks (Hermitian
    compressions by eigenvalue, unitary ones by eigenphase), and blocks
    split wherever the sorted keys separate by more than ``cluster_tol``.
    Returns the basis columns and the final block sizes; singleton blocks
    mean the basis is fixed up to phases, which reduced spectra ignore.
    """
    vectors = np.asarray(vectors)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    B = np.linalg.qr(vectors)[0].astype(np.complex128)
    d = B.shape[1]
    blocks = [np.arange(d)]
    for op in basis_ops or ():
        OB = op @ B
        C = B.conj().T @ OB
        closure = np.linalg.norm(OB - B @ C)
        if closure > 1e-8 * max(1.0, np.linalg.norm(OB)):
            raise ValueError(
                "basis operator does not preserve the manifold "
                f"(leakage {closure:.3e}); it cannot canonicalize the basis"
            )
        refined = []
        for blk in blocks:
            sub = C[np.ix_(blk, blk)]
            if np.abs(sub - sub.conj().T).max() < 1e-10:
                keys, U = np.linalg.eigh(sub)
                keys = keys.real
            else:
                w, U = np.linalg.eig(sub)
                order = np.argsort(np.angle(w))
                w, U = w[order], U[:, order]
                U = np.linalg.qr(U)[0]
                keys = np.angle(w)
            B[:, blk] = B[:, blk] @ U
            start = 0
            for t in range(1, len(blk) + 1):
                if t == len(blk) or abs(keys[t] - keys[t - 1]) > cluster_tol:
                    refined.append(blk[start:t])
                    start = t
        blocks = refined
    return B, tuple(len(blk) for blk in blocks)


def compute_p(
    vectors: np.ndarray,
    regions,
    dims=None,
    front_fn=None,
    seed: int = 0,
    n_random_starts: int = 8,
    cross_check: bool = True,
    cross_cap: int = 256,
    basis_ops=None,
    support_tol: float = SUPPORT_TOL,
) -> PopulationBound:
    """Population bound over the given kept regions.

    ``front_fn(vector, sites)`` must return the region-leading cut matrix
    of a full state vector; by default it reshapes qudit chains with the
    given local dimensions. Fermionic callers pass a sign-aware function.
    ``basis_ops`` fix the manifold basis deterministically (see
    canonical_manifold_basis). The cross route is skipped for regions
    above ``cross_cap`` local dimension (entry recorded as None).
    """
    vectors = np.asarray(vectors)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    if front_fn is None:
        if dims is None:
            raise ValueError("give dims or front_fn")
        front_fn = _default_front(dims)
    basis, blocks = canonical_manifold_basis(vectors, basis_ops)
    d = basis.shape[1]
    rows: list[RegionValue] = []
    rng = np.random.default_rng(seed)
    for region in regions:
        region = region if isinstance(region, analysis.Region) else analysis.Region(tuple(region))
        mats = [
            front_fn(np.ascontiguousarray(basis[:, a]), region.sites) for a in range(d)
        ]
        spectra = [np.linalg.eigvalsh(W @ W.conj().T) for W in mats]
        dim = mats[0].shape[0]
        mix_vals = np.linalg.eigvalsh(sum(W @ W.conj().T for W in mats) / d)
        rank = int(np.sum(mix_vals > support_tol))
        if rank < dim:
            value, state_idx, certificate = 0.0, None, "deficient-joint-support"
        else:
            per_state = [max(float(s.min()), 0.0) for s in spectra]
            state_idx = int(np.argmin(per_state))
            value = per_state[state_idx]
            if value <= support_tol:
                value, certificate = 0.0, "deficient-state-support"
            else:
                certificate = None
        cross = None
        if cross_check and dim <= cross_cap:
            cross = _alternating_region_value(mats, rng, n_random_starts)
        rows.append(RegionValue(region, value, cross, rank, dim, state_idx, certificate))
    if not rows:
        raise ValueError("no regions given")
    values = np.array([r.value for r in rows])
    idx = int(np.argmin(values))
    p = float(values[idx])
    crosses = [r.cross_value for r in rows if r.cross_value is not None]
    cross_p = float(min(crosses)) if crosses else None
    gap = (p - cross_p) if cross_p is not None else None
    full_rank = all(r.support_rank == r.dim for r in rows)
    return PopulationBound(p, cross_p, idx, rows, gap, full_rank, d > 1, blocks)


def choose_surrogate_region(bound: PopulationBound, tol: float = 1e-12) -> SurrogateChoice:
    """Deterministic choice of the region presumed to saturate the bound.

    The lowest-index region among those within ``tol`` of the minimum is
    selected; ties are flagged rather than silently broken.
    """
    values = np.array([r.value for r in bound.rows])
    winners = np.nonzero(values <= values.min() + tol)[0]
    idx = int(winners[0])
    return SurrogateChoice(
        idx, bound.rows[idx].region, float(values[idx]), len(winners) > 1, bound.full_rank
    )


def presumed_surrogate(
    psi: np.ndarray,
    region,
    dims=None,
    front_fn=None,
    tol: float = 1e-9,
) -> SurrogateState:
    """Best-reachable approximation of a pure target on one kept region.

    Projects out the smallest Schmidt component across the region cut and
    renormalizes, so the returned fidelity is exactly one minus the
    smallest reduced eigenvalue. A rank-deficient cut already admits a
    strict invariant projector, so the state comes back unchanged with
    fidelity one and a flag. Degenerate smallest components are resolved
    toward the branch whose kept part has the lowest region basis index,
    and the tie is flagged. Without ``dims`` the full-space embedding of
    the projection is unavailable and only the fidelity is returned.
    """
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    sites = region.sites if isinstance(region, analysis.Region) else tuple(region)
    if dims is not None:
        dims = analysis._infer_dims(dims, psi.shape[0])
    if front_fn is None:
        if dims is None:
            raise ValueError("give dims or front_fn")
        front_fn = _default_front(dims)
    W = front_fn(psi, sites)
    u, s, _ = np.linalg.svd(W, full_matrices=False)
    scale = max(1.0, float(s[0]) if s.size else 1.0)
    if W.shape[0] > W.shape[1] or float(s[-1]) <= tol * scale:
        return SurrogateState(psi.copy(), 1.0, 0.0, True, "rank-deficient")
    tied = s.size > 1 and float(s[-2] - s[-1]) <= tol * scale
    removal = max(np.nonzero(s <= s[-1] + tol * scale)[0])
    weight = float(s[removal] ** 2)
    state = None
    if dims is not None:
        keep = np.eye(W.shape[0], dtype=np.complex128) - np.outer(
            u[:, removal], u[:, removal].conj()
        )
        state = analysis.embed_local(keep, sites, dims) @ psi
        state = state / np.linalg.norm(state)
    note = "tie" if tied else ""
    return SurrogateState(state, 1.0 - weight, weight, tied, note)


def fidelity_bound(p: float) -> float:
    return 1.0 - p


def energy_floor(e_gs: float, gap: float, p: float) -> float:
    return e_gs + p * gap


def temperature_floor(
    energies: np.ndarray,
    p: float,
    counts: np.ndarray | None = None,
    deg_tol: float = 1e-9,
    rel: float = 1e-10,
) -> TemperatureResult:
    """Lowest effective temperature compatible with ground weight 1 - p.

    The thermal ground weight w(beta) = deg * exp(-beta E0) / Z(beta)
    increases monotonically from deg/D at infinite temperature to 1, so
    the matching equation has a unique root bracketed by doubling and
    polished by bisection to relative precision ``rel``. p <= 0 pins the
    temperature to zero; 1 - p below the infinite-temperature weight
    returns an infinite sentinel.
    """
    energies = np.asarray(energies, dtype=np.float64)
    if counts is None:
        counts = np.ones_like(energies)
    counts = np.asarray(counts, dtype=np.float64)
    if energies.shape != counts.shape or energies.size == 0:
        raise ValueError("energies and counts must be equal-length and non-empty")
    e0 = float(energies.min())
    shifted = energies - e0
    ground = shifted <= deg_tol * max(1.0, float(np.abs(energies).max()))
    deg = float(counts[ground].sum())
    dim = float(counts.sum())
    target = 1.0 - p

    def weight(beta: float) -> float:
        return deg / float(np.sum(counts * np.exp(-beta * shifted)))

    if p <= 0.0:
        return TemperatureResult(0.0, np.inf, target, int(deg), int(dim), "zero")
    if target <= deg / dim + 1e-15:
        return TemperatureResult(np.inf, 0.0, target, int(deg), int(dim), "infinite")
    if target >= 1.0:
        return TemperatureResult(0.0, np.inf, target, int(deg), int(dim), "zero")

    hi = 1.0
    expansions = 0
    while weight(hi) < target:
        hi *= 2.0
        expansions += 1
        if expansions > 400:
            raise ArithmeticError(
                "ground-weight equation failed to bracket; spectrum may be degenerate"
            )
    lo = 0.0
    while hi - lo > rel * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if weight(mid) < target:
            lo = mid
        else:
            hi = mid
    beta = 0.5 * (lo + hi)
    return TemperatureResult(1.0 / beta, beta, target, int(deg), int(dim), "finite")


@dataclass
class GlassFloorReport:
    model: str
    regions: list
    p: float
    fidelity_bound: float
    energy_bound: float
    T_eff_min: float
    T_over_gap: float
    ensemble: str
    per_region_table: list
    cross_p: float | None = None
    cross_gap: float | None = None
    surrogate: SurrogateChoice | None = None
    ground_energy: float | None = None
    gap: float | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def num(x):
            if x is None:
                return None
            x = float(x)
            if np.isinf(x):
                return "inf"
            return x

        return {
            "model": self.model,
            "regions": self.regions,
            "p": num(self.p),
            "fidelity_bound": num(self.fidelity_bound),
            "energy_bound": num(self.energy_bound),
            "T_eff_min": num(self.T_eff_min),
            "T_over_gap": num(self.T_over_gap),
            "ensemble": self.ensemble,
            "per_region_table": self.per_region_table,
            "cross_p": num(self.cross_p),
            "cross_gap": num(self.cross_gap),
            "ground_energy": num(self.ground_energy),
            "gap": num(self.gap),
            **{k: v for k, v in self.extras.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def run_glass_floor(
    model_label: str,
    vectors: np.ndarray,
    regions,
    energies: np.ndarray,
    e_gs: float,
    gap: float,
    dims=None,
    front_fn=None,
    counts: np.ndarray | None = None,
    ensemble: str = "sector",
    seed: int = 0,
    basis_ops=None,
) -> GlassFloorReport:
    """Full floor computation for one model instance.

    ``energies`` (with optional ``counts``) define the thermal ensemble
    used for the temperature floor; the caller decides whether they come
    from one symmetry sector or the whole space and labels accordingly.
    """
    bound = compute_p(
        vectors, regions, dims=dims, front_fn=front_fn, seed=seed, basis_ops=basis_ops
    )
    surrogate = choose_surrogate_region(bound)
    temp = temperature_floor(energies, bound.p, counts=counts)
    t_over_gap = (
        temp.temperature / gap if np.isfinite(temp.temperature) and gap > 0 else np.inf
    )
    table = [
        {
            "region": list(r.region.sites),
            "label": r.region.label,
            "p": float(r.value),
            "cross_p": None if r.cross_value is None else float(r.cross_value),
            "support_rank": r.support_rank,
            "dim": r.dim,
            "state_index": r.state_index,
            "certificate": r.certificate,
        }
        for r in bound.rows
    ]
    return GlassFloorReport(
        model=model_label,
        regions=[list(r.region.sites) for r in bound.rows],
        p=bound.p,
        fidelity_bound=fidelity_bound(bound.p),
        energy_bound=energy_floor(e_gs, gap, bound.p),
        T_eff_min=temp.temperature,
        T_over_gap=t_over_gap,
        ensemble=ensemble,
        per_region_table=table,
        cross_p=bound.cross_p,
        cross_gap=bound.cross_gap,
        surrogate=surrogate,
        ground_energy=e_gs,
        gap=gap,
        extras={
            "temperature_regime": temp.regime,
            "degenerate_manifold": bound.degenerate,
            "basis_blocks": list(bound.basis_blocks),
        },
    )
