"""Reduced-state analysis: local supports, parent Hamiltonians, classification.

States are full Hilbert-space vectors (or density matrices) over a chain
of sites with given local dimensions. Fermionic states use the mode
conventions of the diagonalization layer: mode j sits at bit m-1-j, and
reduced states on arbitrary mode subsets re-sign amplitudes with the
crossing parity picked up when the kept modes are pulled to the front.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cph

SUPPORT_TOL = 1e-10

__all__ = [
    "Region",
    "ReducedState",
    "SCQResult",
    "partial_trace",
    "reduced_state",
    "region_matrix",
    "fermionic_reduced_state",
    "fermionic_region_matrix",
    "embed_local",
    "find_trivial_scq",
    "verify_scq",
    "build_parent_hamiltonian",
    "bipartite_distinguishable",
    "classify",
]


@dataclass(frozen=True)
class Region:
    """A subset of sites (or fermionic modes), kept in ascending order."""

    sites: tuple
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(sorted(int(s) for s in self.sites)))

    def __len__(self):
        return len(self.sites)


@dataclass(frozen=True)
class ReducedState:
    """Density matrix on kept sites with its sorted spectrum.

    eigenvalues are descending; smallest is reported raw (it may be a
    tiny negative round-off) and smallest_nonzero applies the absolute
    support threshold.
    """

    rho: np.ndarray
    kept: tuple
    eigenvalues: np.ndarray
    smallest: float
    smallest_nonzero: float
    support_rank: int


def _finish_rho(rho: np.ndarray, kept) -> ReducedState:
    vals = np.linalg.eigvalsh(rho)[::-1].copy()
    above = vals[vals > SUPPORT_TOL]
    smallest_nonzero = float(above.min()) if above.size else 0.0
    return ReducedState(
        rho, tuple(kept), vals, float(vals[-1]), smallest_nonzero, int(above.size)
    )


def _dims_tuple(dims, n_sites=None):
    if isinstance(dims, (int, np.integer)):
        if n_sites is None:
            raise ValueError("site count needed with a scalar local dimension")
        return (int(dims),) * n_sites
    return tuple(int(d) for d in dims)


def _infer_dims(dims, size):
    if isinstance(dims, (int, np.integer)):
        d = int(dims)
        n = round(np.log(size) / np.log(d))
        if d**n != size:
            raise ValueError(f"state size {size} is not a power of {d}")
        return (d,) * n
    return _dims_tuple(dims)


def region_matrix(state: np.ndarray, keep, dims) -> np.ndarray:
    """Vector reshaped across the (keep | rest) cut, kept sites leading."""
    state = np.asarray(state)
    if state.ndim != 1:
        raise ValueError("region_matrix expects a state vector")
    dims = _infer_dims(dims, state.shape[0])
    n = len(dims)
    keep = sorted(int(s) for s in keep)
    if any(not 0 <= s < n for s in keep):
        raise ValueError(f"kept sites {keep} outside 0..{n - 1}")
    out = [s for s in range(n) if s not in keep]
    dk = int(np.prod([dims[s] for s in keep])) if keep else 1
    do = int(np.prod([dims[s] for s in out])) if out else 1
    return state.reshape(dims).transpose(keep + out).reshape(dk, do)


def fermionic_region_matrix(psi: np.ndarray, keep, m: int) -> np.ndarray:
    """Cut matrix of a fermionic vector with crossing signs applied."""
    psi = np.asarray(psi)
    if psi.shape[0] != 1 << m:
        raise ValueError(f"state size {psi.shape[0]} does not match {m} modes")
    keep = sorted(int(s) for s in keep)
    return region_matrix(psi * _crossing_signs(m, keep), keep, (2,) * m)


def reduced_state(state: np.ndarray, keep, dims) -> ReducedState:
    """Reduced density matrix on the kept sites (ascending order).

    ``state`` is a vector or a density matrix over the full chain;
    ``dims`` is the per-site local dimension tuple or a scalar applied to
    every site, in which case the site count is inferred.
    """
    state = np.asarray(state)
    dims = _infer_dims(dims, state.shape[0])
    n = len(dims)
    keep = sorted(int(s) for s in keep)
    if any(not 0 <= s < n for s in keep):
        raise ValueError(f"kept sites {keep} outside 0..{n - 1}")
    out = [s for s in range(n) if s not in keep]
    dk = int(np.prod([dims[s] for s in keep])) if keep else 1
    do = int(np.prod([dims[s] for s in out])) if out else 1
    if state.ndim == 1:
        t = region_matrix(state, keep, dims)
        rho = t @ t.conj().T
    elif state.ndim == 2:
        t = state.reshape(dims + dims)
        order = keep + out
        t = t.transpose(order + [n + s for s in order])
        r4 = t.reshape(dk, do, dk, do)
        rho = np.einsum("aibi->ab", r4)
    else:
        raise ValueError("state must be a vector or a density matrix")
    return _finish_rho(rho, keep)


def partial_trace(state: np.ndarray, region_out, dims) -> ReducedState:
    """Trace out the sites of region_out, keeping the complement."""
    sites_out = region_out.sites if isinstance(region_out, Region) else tuple(region_out)
    state = np.asarray(state)
    if isinstance(dims, (int, np.integer)):
        d = int(dims)
        n = round(np.log(state.shape[0]) / np.log(d))
    else:
        n = len(dims)
    keep = [s for s in range(n) if s not in set(int(x) for x in sites_out)]
    return reduced_state(state, keep, dims)


# -- fermionic reduction --------------------------------------------------


def _crossing_signs(m: int, keep) -> np.ndarray:
    """Parity factors for pulling kept modes in front of traced modes.

    For each basis index, the exponent counts occupied traced modes
    standing before each occupied kept mode.
    """
    keep_set = set(keep)
    idx = np.arange(1 << m, dtype=np.int64)
    expo = np.zeros(1 << m, dtype=np.int64)
    prefix_out = np.zeros(1 << m, dtype=np.int64)
    for j in range(m):
        bit = (idx >> (m - 1 - j)) & 1
        if j in keep_set:
            expo += bit * prefix_out
        else:
            prefix_out = prefix_out + bit
    return 1.0 - 2.0 * (expo & 1)


def fermionic_reduced_state(psi: np.ndarray, keep, m: int) -> ReducedState:
    """Mode-subset reduced density matrix of a fermionic state vector.

    Amplitudes are re-signed by the crossing parity before an ordinary
    partial trace; without this the off-diagonal elements on
    non-contiguous mode subsets come out wrong.
    """
    W = fermionic_region_matrix(psi, keep, m)
    return _finish_rho(W @ W.conj().T, sorted(int(s) for s in keep))


# -- local operator embedding --------------------------------------------


def embed_local(op: np.ndarray, sites, dims) -> np.ndarray:
    """Dense full-space operator acting as ``op`` on the given sites."""
    dims = _dims_tuple(dims)
    n = len(dims)
    sites = [int(s) for s in sites]
    rest = [s for s in range(n) if s not in sites]
    d_sites = int(np.prod([dims[s] for s in sites]))
    d_rest = int(np.prod([dims[s] for s in rest])) if rest else 1
    if op.shape != (d_sites, d_sites):
        raise ValueError(f"operator shape {op.shape} does not match sites {sites}")
    full = np.kron(op, np.eye(d_rest))
    order = sites + rest
    dims_perm = [dims[s] for s in order]
    t = full.reshape(dims_perm + dims_perm)
    inv = np.argsort(order)
    t = t.transpose([int(i) for i in inv] + [n + int(i) for i in inv])
    total = int(np.prod(dims))
    return np.ascontiguousarray(t.reshape(total, total))


# -- conserved local supports --------------------------------------------


@dataclass(frozen=True)
class SCQResult:
    """Search result for a local projector fixing every manifold state."""

    exists: bool
    region: Region | None
    projector: np.ndarray | None
    support_rank: int
    region_dim: int
    per_region: list = field(default_factory=list)


def find_trivial_scq(
    vectors: np.ndarray,
    regions,
    dims,
    reduce_fn=None,
    threshold: float = SUPPORT_TOL,
) -> SCQResult:
    """Look for a region whose joint local support is rank deficient.

    The joint support over the whole manifold is the support of the
    uniform mixture of the basis states. A deficient region yields a
    strict local projector that acts as identity on the manifold, which
    certifies a vanishing population bound.
    """
    vectors = np.asarray(vectors)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    nvec = vectors.shape[1]
    best = None
    rows = []
    for region in regions:
        region = region if isinstance(region, Region) else Region(tuple(region))
        mix = None
        for a in range(nvec):
            red = (
                reduce_fn(vectors[:, a], region.sites)
                if reduce_fn is not None
                else reduced_state(vectors[:, a], region.sites, dims)
            )
            mix = red.rho if mix is None else mix + red.rho
        mix = mix / nvec
        vals, vecs = np.linalg.eigh(mix)
        rank = int(np.sum(vals > threshold))
        dim = mix.shape[0]
        rows.append((region, rank, dim))
        if rank < dim and best is None:
            keepers = vecs[:, vals > threshold]
            best = SCQResult(True, region, keepers @ keepers.conj().T, rank, dim, rows)
    if best is not None:
        return SCQResult(
            True, best.region, best.projector, best.support_rank, best.region_dim, rows
        )
    last_dim = rows[-1][2] if rows else 0
    return SCQResult(False, None, None, last_dim, last_dim, rows)


@dataclass(frozen=True)
class InducedProjector:
    """Spectral projector of a conserved local operator at one eigenvalue.

    ``deviation`` measures how well the embedded projector fixes the
    manifold vectors belonging to that eigenvalue.
    """

    eigenvalue: float
    projector: np.ndarray
    deviation: float


@dataclass(frozen=True)
class ScqVerification:
    conserved_norm: float
    steering_norm: float
    compression_deviation: float
    eigenvalue: float
    trivial: bool
    degenerate: bool
    induced: tuple
    ok: bool


def _local_spectral_projector(local_op: np.ndarray, value: float):
    vals, vecs = np.linalg.eigh(local_op)
    sel = np.abs(vals - value) <= 1e-6 * max(1.0, float(np.abs(vals).max()))
    if not np.any(sel):
        return None
    cols = vecs[:, sel]
    return cols @ cols.conj().T


def verify_scq(
    hamiltonian: np.ndarray,
    vectors: np.ndarray,
    region,
    local_op: np.ndarray,
    dims,
    tol: float = 1e-8,
) -> ScqVerification:
    """Check that a local operator is conserved on a manifold.

    Two norms decide conservation: the commutator with the manifold
    projector and the projected commutator with the Hamiltonian. The
    compression onto the manifold then determines trivialness. A trivial
    operator compresses to a multiple of the manifold projector and its
    spectral projector at that value must fix every manifold vector; it
    is flagged degenerate when that projector is the whole region, which
    certifies nothing. A non-trivial operator splits the manifold into
    eigenvalue blocks, and each block's spectral projector is emitted
    with the deviation from fixing its own block.
    """
    sites = region.sites if isinstance(region, Region) else tuple(region)
    vectors = np.asarray(vectors)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    d_man = vectors.shape[1]
    dims = _infer_dims(dims, vectors.shape[0])
    A = embed_local(local_op, sites, dims)
    proj = vectors @ vectors.conj().T
    conserved = float(np.linalg.norm(proj @ A - A @ proj))
    hcomm = hamiltonian @ A - A @ hamiltonian
    steering = float(np.linalg.norm(proj @ hcomm @ proj))

    compressed = vectors.conj().T @ A @ vectors
    c = float(np.real(np.trace(compressed))) / d_man
    comp_dev = float(np.linalg.norm(compressed - c * np.eye(d_man)))
    trivial = comp_dev <= tol

    induced = []
    degenerate = False
    if trivial:
        spec = _local_spectral_projector(local_op, c)
        if spec is None:
            induced.append(InducedProjector(c, np.zeros_like(local_op), float("inf")))
        else:
            dev = float(np.linalg.norm(embed_local(spec, sites, dims) @ vectors - vectors))
            induced.append(InducedProjector(c, spec, dev))
            degenerate = bool(
                np.linalg.norm(spec - np.eye(spec.shape[0])) <= 1e-9 * spec.shape[0]
            )
    else:
        block_vals, block_vecs = np.linalg.eigh((compressed + compressed.conj().T) / 2.0)
        start = 0
        for k in range(1, d_man + 1):
            if k < d_man and abs(block_vals[k] - block_vals[start]) <= 1e-6:
                continue
            a = float(np.mean(block_vals[start:k]))
            members = vectors @ block_vecs[:, start:k]
            spec = _local_spectral_projector(local_op, a)
            if spec is None:
                induced.append(InducedProjector(a, np.zeros_like(local_op), float("inf")))
            else:
                dev = float(np.linalg.norm(embed_local(spec, sites, dims) @ members - members))
                induced.append(InducedProjector(a, spec, dev))
            start = k

    h_scale = max(float(np.linalg.norm(hamiltonian)), 1.0)
    a_scale = max(float(np.linalg.norm(A)), 1.0)
    ok = (
        conserved <= tol * a_scale
        and steering <= tol * h_scale
        and all(ip.deviation <= tol for ip in induced)
    )
    return ScqVerification(
        conserved, steering, comp_dev, c, trivial, degenerate, tuple(induced), ok
    )


# -- parent Hamiltonian ---------------------------------------------------


@dataclass(frozen=True)
class ParentResult:
    verdict: str
    window_size: int
    gs_dim: int
    manifold_dim: int
    frobenius_dev: float
    diagonal: bool
    windows: list

    @property
    def matches(self) -> bool:
        return self.verdict == "PHFF"


def _chain_windows(n: int, w: int, periodic: bool) -> list:
    if w >= n:
        return [tuple(range(n))]
    if periodic:
        return [tuple(sorted((s + k) % n for k in range(w))) for s in range(n)]
    return [tuple(range(s, s + w)) for s in range(n - w + 1)]


def _is_basis_aligned(vectors: np.ndarray) -> bool:
    proj = vectors @ vectors.conj().T
    off = proj - np.diag(np.diag(proj))
    return bool(np.abs(off).max(initial=0.0) < 1e-12)


def build_parent_hamiltonian(
    vectors: np.ndarray,
    n_sites: int,
    window: int,
    local_dim: int = 2,
    periodic: bool = True,
    threshold: float = SUPPORT_TOL,
    frob_tol: float = 1e-8,
) -> ParentResult:
    """Sum of window-support complements and how its kernel compares.

    Each window contributes the projector onto the orthogonal complement
    of the manifold's joint local support there, so the manifold always
    sits in the kernel. Verdicts: "PHFF" when the kernel equals
    the manifold (projector difference within frob_tol in Frobenius
    norm), "larger-GS" when extra states slip in, and "no-SCQ"
    when no window shows any support deficiency at all.

    Manifolds spanned by computational basis states take a diagonal fast
    path, which keeps chains of a dozen sites cheap.
    """
    vectors = np.asarray(vectors)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    dims = (local_dim,) * n_sites
    total = int(np.prod(dims))
    if vectors.shape[0] != total:
        raise ValueError(
            f"vector size {vectors.shape[0]} does not match {n_sites} sites of dim {local_dim}"
        )
    windows = _chain_windows(n_sites, window, periodic)
    d_man = vectors.shape[1]

    if local_dim == 2 and _is_basis_aligned(vectors):
        support = np.nonzero(np.abs(np.diag(vectors @ vectors.conj().T)) > threshold)[0]
        bits = ((support[:, None] >> (n_sites - 1 - np.arange(n_sites))) & 1).astype(np.int64)
        all_idx = np.arange(total, dtype=np.int64)
        all_bits = ((all_idx[:, None] >> (n_sites - 1 - np.arange(n_sites))) & 1).astype(np.int64)
        diag = np.zeros(total, dtype=np.float64)
        constrained = False
        for win in windows:
            cols = np.array(win)
            place = np.arange(len(win))
            keys = (bits[:, cols] << place[::-1]).sum(axis=1)
            allowed = np.unique(keys)
            if allowed.size < 2 ** len(win):
                constrained = True
            full_keys = (all_bits[:, cols] << place[::-1]).sum(axis=1)
            diag += (~np.isin(full_keys, allowed)).astype(np.float64)
        kernel = np.nonzero(diag < 0.5)[0]
        gs_dim = int(kernel.size)
        if not constrained:
            return ParentResult("no-SCQ", window, gs_dim, d_man, np.inf, True, windows)
        if gs_dim == support.size and np.array_equal(np.sort(kernel), np.sort(support)):
            return ParentResult("PHFF", window, gs_dim, d_man, 0.0, True, windows)
        return ParentResult("larger-GS", window, gs_dim, d_man, np.inf, True, windows)

    if total > 4096:
        raise ValueError(
            f"dimension {total} too large for the dense path; "
            "manifold is not basis aligned"
        )
    H = np.zeros((total, total), dtype=np.complex128)
    constrained = False
    for win in windows:
        mix = None
        for a in range(d_man):
            red = reduced_state(vectors[:, a], list(win), dims)
            mix = red.rho if mix is None else mix + red.rho
        vals, vecs = np.linalg.eigh(mix / d_man)
        null_cols = vecs[:, vals <= threshold]
        if null_cols.shape[1] == 0:
            continue
        constrained = True
        comp = null_cols @ null_cols.conj().T
        H += embed_local(comp, list(win), dims)
    if not constrained:
        return ParentResult("no-SCQ", window, total, d_man, np.inf, False, windows)
    vals, vecs = np.linalg.eigh(H)
    scale = max(float(np.abs(vals).max(initial=0.0)), 1.0)
    kernel = vecs[:, np.abs(vals) <= 1e-9 * scale]
    gs_dim = kernel.shape[1]
    p_kernel = kernel @ kernel.conj().T
    p_man = vectors @ vectors.conj().T
    dev = float(np.linalg.norm(p_kernel - p_man))
    if gs_dim == d_man and dev <= frob_tol:
        return ParentResult("PHFF", window, gs_dim, d_man, dev, False, windows)
    return ParentResult("larger-GS", window, gs_dim, d_man, dev, False, windows)


# -- bipartite distinguishability ----------------------------------------


@dataclass(frozen=True)
class DistinguishabilityReport:
    distinguishable: bool
    smallest_sv: float
    witness: np.ndarray | None


def bipartite_distinguishable(
    vectors: np.ndarray,
    part_a,
    dims,
    threshold: float = 1e-9,
) -> DistinguishabilityReport:
    """Does tracing out the region stay injective on the manifold?

    Tracing the region out of each |psi_i><psi_j| leaves d^2 operators on
    the complement; the manifold is distinguishable from there exactly
    when those operators are linearly independent. The smallest singular
    value of their stacked flattening decides against the threshold.
    When dependent, the witness is a d x d coefficient matrix c with
    sum_ij c_ij Tr_S |psi_i><psi_j| = 0, so the two states rho and
    rho + eps * sum_ij c_ij |psi_i><psi_j| share every observable on the
    complement.
    """
    vectors = np.asarray(vectors)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    dims = _infer_dims(dims, vectors.shape[0])
    n = len(dims)
    a_sites = sorted(int(s) for s in (part_a.sites if isinstance(part_a, Region) else part_a))
    b_sites = [s for s in range(n) if s not in a_sites]
    if not a_sites or not b_sites:
        raise ValueError("the region must be a proper nonempty subset of the sites")
    da = int(np.prod([dims[s] for s in a_sites]))
    db = int(np.prod([dims[s] for s in b_sites]))
    d = vectors.shape[1]
    mats = [
        vectors[:, k].reshape(dims).transpose(a_sites + b_sites).reshape(da, db)
        for k in range(d)
    ]
    stack = np.empty((d * d, db * db), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            stack[i * d + j] = (mats[i].T @ mats[j].conj()).ravel()
    u, sv, _ = np.linalg.svd(stack, full_matrices=True)
    smallest = float(sv[-1]) if d * d <= db * db else 0.0
    if smallest > threshold:
        return DistinguishabilityReport(True, smallest, None)
    witness = u[:, -1].conj().reshape(d, d)
    return DistinguishabilityReport(False, smallest, witness)


# -- classification -------------------------------------------------------


@dataclass(frozen=True)
class ClassificationReport:
    label: str
    evidence: dict


def classify(
    obj,
    *,
    term_decomposition=None,
    regions=None,
    dims=None,
    max_window: int | None = None,
    periodic: bool = True,
) -> ClassificationReport:
    """Sort a model into steerability classes.

    Commuting Pauli Hamiltonians are handled exactly: if the ground
    sector satisfies every term the model is frustration free ("FFS"),
    otherwise the explicit steering construction still reaches the ground
    space, giving "NFFJS". Dense models are probed in order: term-wise
    frustration freeness, a parent-Hamiltonian window scan ("NFFSS" when
    an exact local parent exists), then the population bound over the
    given regions ("NFFNS" when it is strictly positive), and finally a
    scan for a cut that makes the manifold bipartite indistinguishable
    ("NFFJS-candidate" when one exists, since the necessary conditions
    hold without a constructive protocol). Anything left over is
    "unknown".
    """
    if isinstance(obj, cph.CommutingHamiltonian):
        res = cph.ground_energy_search(obj)
        target = -float(np.sum(obj.weights))
        if res.exact and res.energy <= target + 1e-9:
            return ClassificationReport(
                "FFS", {"ground_energy": res.energy, "term_sum": target}
            )
        return ClassificationReport(
            "NFFJS",
            {
                "ground_energy": res.energy,
                "term_sum": target,
                "reason": "commuting terms admit an explicit steering protocol",
            },
        )

    matrix = obj.matrix if hasattr(obj, "matrix") else np.asarray(obj)
    if dims is None:
        if hasattr(obj, "n_sites"):
            dims = (obj.local_dim,) * obj.n_sites
        else:
            raise ValueError("dims required for a bare matrix")
    dims = _dims_tuple(dims)
    n = len(dims)
    from . import ed as _ed

    manifold = _ed.ground_manifold(matrix)
    evidence: dict = {
        "ground_energy": manifold.energy,
        "degeneracy": manifold.degeneracy,
        "gap": manifold.gap,
    }

    if term_decomposition:
        bound = 0.0
        for sites, local in term_decomposition:
            bound += float(np.linalg.eigvalsh(np.asarray(local))[0])
        evidence["frustration_free_bound"] = bound
        if manifold.energy <= bound + 1e-9:
            evidence["frustration_free"] = True
            return ClassificationReport("FFS", evidence)
        evidence["frustration_free"] = False

    top = max_window if max_window is not None else n - 1
    for w in range(2, max(top, 2) + 1):
        res = build_parent_hamiltonian(
            manifold.vectors, n, w, local_dim=dims[0], periodic=periodic
        )
        if res.matches:
            evidence["parent_window"] = w
            return ClassificationReport("NFFSS", evidence)

    if regions is None:
        regions = [Region((s, (s + 1) % n)) for s in range(n if periodic else n - 1)]
    from . import glassfloor as _gf

    p = _gf.compute_p(manifold.vectors, regions, dims=dims)
    evidence["p"] = p.p
    if p.p > 1e-9:
        return ClassificationReport("NFFNS", evidence)

    cuts = [Region(tuple(range(k))) for k in range(1, n)]
    for cut in cuts:
        rep = bipartite_distinguishable(manifold.vectors, cut, dims)
        if not rep.distinguishable:
            evidence["indistinguishable_cut"] = cut.sites
            return ClassificationReport("NFFJS-candidate", evidence)
    evidence["all_cuts_distinguishable"] = True
    return ClassificationReport("unknown", evidence)
