"""Reduced states, conserved local supports, parent Hamiltonians, labels."""

import numpy as np
import pytest

from steerkit import analysis, ed, models
from steerkit.analysis import Region

Z = np.diag([1.0, -1.0])
X = np.array([[0.0, 1.0], [1.0, 0.0]])
LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])


def kron_chain(ops) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def ghz(n: int) -> np.ndarray:
    v = np.zeros(1 << n)
    v[0] = v[-1] = 1.0 / np.sqrt(2.0)
    return v


def dicke_one(n: int) -> np.ndarray:
    v = np.zeros(1 << n)
    for s in range(n):
        v[1 << (n - 1 - s)] = 1.0
    return v / np.sqrt(n)


def ising_ring_matrix(n: int, coupling: float) -> np.ndarray:
    h = np.zeros((1 << n, 1 << n))
    for s in range(n):
        ops = [np.eye(2)] * n
        ops[s] = Z
        ops[(s + 1) % n] = Z
        h += coupling * kron_chain(ops)
    return h


def ferro_pair(n: int) -> np.ndarray:
    vs = np.zeros((1 << n, 2))
    vs[0, 0] = 1.0
    vs[-1, 1] = 1.0
    return vs


def afm_ring_manifold(n: int) -> np.ndarray:
    """One-hot vectors for every odd-ring state with a single aligned bond."""
    cols = []
    for idx in range(1 << n):
        bits = [(idx >> (n - 1 - s)) & 1 for s in range(n)]
        aligned = sum(bits[s] == bits[(s + 1) % n] for s in range(n))
        if aligned == 1:
            cols.append(idx)
    vs = np.zeros((1 << n, len(cols)))
    for k, idx in enumerate(cols):
        vs[idx, k] = 1.0
    return vs


def jw_annihilator(mode: int, n_modes: int) -> np.ndarray:
    return kron_chain([Z] * mode + [LOWER] + [np.eye(2)] * (n_modes - mode - 1))


# -- regions and reduced spectra ------------------------------------------


def test_region_sorts_sites():
    r = Region((3, 1, 2))
    assert r.sites == (1, 2, 3)
    assert len(r) == 3


def test_ghz_single_qubit_reduction_is_half_half():
    for n in range(3, 7):
        for site in (0, n // 2, n - 1):
            out = [s for s in range(n) if s != site]
            red = analysis.partial_trace(ghz(n), Region(tuple(out)), dims=2)
            assert red.kept == (site,)
            assert np.allclose(red.rho, np.eye(2) / 2.0, atol=1e-12)
            assert red.eigenvalues == pytest.approx([0.5, 0.5], abs=1e-12)
            assert red.support_rank == 2


def test_product_state_reduces_to_rank_one():
    rng = np.random.default_rng(3)
    parts = [rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(4)]
    parts = [p / np.linalg.norm(p) for p in parts]
    red = analysis.reduced_state(kron_chain(parts), (1, 2), dims=2)
    assert red.support_rank == 1
    assert red.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
    assert red.smallest_nonzero == pytest.approx(1.0, abs=1e-12)


def test_single_excitation_state_has_two_level_spectrum():
    n = 6
    state = dicke_one(n)
    for k in (1, 2, 3):
        red = analysis.reduced_state(state, tuple(range(k)), dims=2)
        assert red.support_rank == 2
        expect = sorted([(n - k) / n, k / n], reverse=True)
        assert red.eigenvalues[:2] == pytest.approx(expect, abs=1e-12)
        assert abs(red.eigenvalues[2:]).max(initial=0.0) < 1e-12
        assert red.smallest_nonzero == pytest.approx(min(expect), abs=1e-12)


def test_reduced_spectrum_matches_schmidt_coefficients():
    rng = np.random.default_rng(11)
    for dims in [(2, 2, 2, 2), (2, 3, 2), (3, 2, 2, 2)]:
        total = int(np.prod(dims))
        psi = rng.normal(size=total) + 1j * rng.normal(size=total)
        psi /= np.linalg.norm(psi)
        for keep in [(0,), (1,), (0, 2)]:
            red = analysis.reduced_state(psi, keep, dims)
            w = analysis.region_matrix(psi, keep, dims)
            sv = np.linalg.svd(w, compute_uv=False)
            schmidt = np.zeros_like(red.eigenvalues)
            schmidt[: sv.size] = sv**2
            assert np.allclose(red.eigenvalues, schmidt, atol=1e-10)
            assert red.eigenvalues.sum() == pytest.approx(1.0, abs=1e-10)


def test_density_matrix_input_matches_vector_input():
    rng = np.random.default_rng(5)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    a = analysis.reduced_state(psi, (1, 3), dims=2)
    b = analysis.reduced_state(np.outer(psi, psi.conj()), (1, 3), dims=2)
    assert np.allclose(a.rho, b.rho, atol=1e-12)


def test_reduction_rejects_bad_sites_and_sizes():
    with pytest.raises(ValueError):
        analysis.reduced_state(np.ones(8) / np.sqrt(8), (3,), dims=2)
    with pytest.raises(ValueError):
        analysis.reduced_state(np.ones(6), (0,), dims=2)


# -- fermionic reduction ---------------------------------------------------


def test_fermionic_reduction_preserves_pair_correlators():
    m = 5
    rng = np.random.default_rng(7)
    psi = rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m)
    psi /= np.linalg.norm(psi)
    keep = (1, 3)
    red = analysis.fermionic_reduced_state(psi, keep, m)
    assert np.trace(red.rho).real == pytest.approx(1.0, abs=1e-12)
    assert red.smallest > -1e-10
    a_full = {j: jw_annihilator(j, m) for j in keep}
    a_loc = {keep[p]: jw_annihilator(p, len(keep)) for p in range(len(keep))}
    for i in keep:
        for j in keep:
            want = np.vdot(psi, a_full[i].conj().T @ a_full[j] @ psi)
            got = np.trace(red.rho @ a_loc[i].conj().T @ a_loc[j])
            assert abs(want - got) < 1e-12
    want = np.vdot(psi, a_full[1] @ a_full[3] @ psi)
    got = np.trace(red.rho @ a_loc[1] @ a_loc[3])
    assert abs(want - got) < 1e-12


def test_fermionic_reduction_on_leading_modes_matches_spin_reduction():
    m = 4
    rng = np.random.default_rng(9)
    psi = rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m)
    psi /= np.linalg.norm(psi)
    a = analysis.fermionic_reduced_state(psi, (0, 1), m)
    b = analysis.reduced_state(psi, (0, 1), dims=2)
    assert np.allclose(a.rho, b.rho, atol=1e-12)


def test_fermionic_reduction_rejects_wrong_size():
    with pytest.raises(ValueError):
        analysis.fermionic_reduced_state(np.ones(12), (0,), 4)


# -- operator embedding ----------------------------------------------------


def test_embed_local_places_middle_site():
    got = analysis.embed_local(Z, (1,), (2, 2, 2))
    assert np.allclose(got, kron_chain([np.eye(2), Z, np.eye(2)]))


def test_embed_local_expectation_matches_reduced_state():
    rng = np.random.default_rng(13)
    dims = (2, 3, 2, 2)
    psi = rng.normal(size=24) + 1j * rng.normal(size=24)
    psi /= np.linalg.norm(psi)
    op = rng.normal(size=(4, 4))
    op = op + op.T
    full = np.vdot(psi, analysis.embed_local(op, (0, 3), dims) @ psi).real
    red = analysis.reduced_state(psi, (0, 3), dims)
    assert full == pytest.approx(np.trace(red.rho @ op).real, abs=1e-10)


def test_embed_local_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        analysis.embed_local(Z, (0, 1), (2, 2, 2))


# -- conserved local supports ---------------------------------------------


def test_aligned_pair_support_on_ferro_manifold():
    res = analysis.find_trivial_scq(ferro_pair(4), [Region((0, 1))], dims=2)
    assert res.exists
    assert res.support_rank == 2
    assert res.region_dim == 4
    assert np.allclose(res.projector, np.diag([1.0, 0.0, 0.0, 1.0]), atol=1e-12)


def test_odd_ring_two_site_supports_are_full():
    n = 5
    vs = afm_ring_manifold(n)
    assert vs.shape[1] == 2 * n
    regions = [Region((s, (s + 1) % n)) for s in range(n)]
    res = analysis.find_trivial_scq(vs, regions, dims=2)
    assert not res.exists
    assert all(rank == dim for _, rank, dim in res.per_region)


def test_odd_ring_three_site_support_excludes_aligned_triples():
    n = 5
    vs = afm_ring_manifold(n)
    res = analysis.find_trivial_scq(vs, [Region((0, 1, 2))], dims=2)
    assert res.exists
    assert res.support_rank == 6
    want = np.eye(8)
    want[0, 0] = want[7, 7] = 0.0
    assert np.allclose(res.projector, want, atol=1e-12)


def test_full_rank_state_admits_no_local_fixing_projector():
    rng = np.random.default_rng(17)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    regions = [Region((s, s + 1)) for s in range(3)]
    res = analysis.find_trivial_scq(psi, regions, dims=2)
    assert not res.exists
    red = analysis.reduced_state(psi, (0, 1), dims=2)
    vals, vecs = np.linalg.eigh(red.rho)
    drop = vecs[:, 1:] @ vecs[:, 1:].conj().T
    population = np.vdot(psi, analysis.embed_local(drop, (0, 1), (2,) * 4) @ psi).real
    assert population <= 1.0 - vals[0] + 1e-12
    assert population < 1.0 - 1e-6


# -- conservation checks ---------------------------------------------------


def test_identity_is_conserved_but_degenerate():
    h = ising_ring_matrix(4, -1.0)
    rep = analysis.verify_scq(h, ferro_pair(4), (0, 1), np.eye(4), dims=2)
    assert rep.ok
    assert rep.trivial
    assert rep.degenerate
    assert rep.eigenvalue == pytest.approx(1.0, abs=1e-12)


def test_bond_parity_is_exactly_conserved_on_ferro_manifold():
    h = ising_ring_matrix(4, -1.0)
    rep = analysis.verify_scq(h, ferro_pair(4), (0, 1), np.kron(Z, Z), dims=2)
    assert rep.ok
    assert rep.trivial
    assert not rep.degenerate
    assert rep.conserved_norm == 0.0
    assert rep.steering_norm == 0.0
    assert rep.eigenvalue == pytest.approx(1.0, abs=1e-12)
    (ip,) = rep.induced
    assert ip.deviation < 1e-12
    assert np.allclose(ip.projector, np.diag([1.0, 0.0, 0.0, 1.0]), atol=1e-12)


def test_single_site_magnetization_splits_the_manifold():
    h = ising_ring_matrix(4, -1.0)
    rep = analysis.verify_scq(h, ferro_pair(4), (0,), Z, dims=2)
    assert rep.ok
    assert not rep.trivial
    values = sorted(ip.eigenvalue for ip in rep.induced)
    assert values == pytest.approx([-1.0, 1.0], abs=1e-9)
    for ip in rep.induced:
        assert ip.deviation < 1e-9
        assert np.allclose(ip.projector @ ip.projector, ip.projector, atol=1e-12)


def test_split_detection_is_basis_independent():
    h = ising_ring_matrix(4, -1.0)
    vs = ferro_pair(4)
    mixed = np.stack(
        [(vs[:, 0] + vs[:, 1]) / np.sqrt(2), (vs[:, 0] - vs[:, 1]) / np.sqrt(2)],
        axis=1,
    )
    rep = analysis.verify_scq(h, mixed, (0,), Z, dims=2)
    assert rep.ok
    assert not rep.trivial
    assert sorted(ip.eigenvalue for ip in rep.induced) == pytest.approx([-1.0, 1.0], abs=1e-9)


def test_non_conserved_operator_is_rejected():
    h = ising_ring_matrix(4, -1.0)
    rep = analysis.verify_scq(h, ferro_pair(4), (0,), X, dims=2)
    assert not rep.ok
    assert rep.conserved_norm > 1.0


# -- parent Hamiltonians ---------------------------------------------------


def test_ferro_pair_has_exact_window_two_parent():
    res = analysis.build_parent_hamiltonian(ferro_pair(5), 5, 2)
    assert res.verdict == "PHFF"
    assert res.matches
    assert res.gs_dim == 2
    assert res.diagonal


def test_ghz_parent_admits_extra_ground_states():
    res = analysis.build_parent_hamiltonian(ghz(4), 4, 2)
    assert res.verdict == "larger-GS"
    assert res.gs_dim == 2
    assert res.manifold_dim == 1
    assert not res.diagonal


def test_generic_state_yields_no_constraints():
    rng = np.random.default_rng(19)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    res = analysis.build_parent_hamiltonian(psi, 4, 2)
    assert res.verdict == "no-SCQ"


def test_odd_ring_window_three_parent_is_too_small_at_seven():
    res = analysis.build_parent_hamiltonian(afm_ring_manifold(7), 7, 3)
    assert res.verdict == "larger-GS"
    assert res.gs_dim > 14


@pytest.mark.parametrize("n", [5, 7, 9])
def test_odd_ring_minimal_exact_window(n):
    window = -(-(n + 4) // 3)
    vs = afm_ring_manifold(n)
    hit = analysis.build_parent_hamiltonian(vs, n, window)
    assert hit.verdict == "PHFF"
    assert hit.gs_dim == 2 * n
    miss = analysis.build_parent_hamiltonian(vs, n, window - 1)
    assert miss.verdict != "PHFF"


def test_enumerated_odd_ring_manifold_matches_diagonalization():
    n = 5
    vs = afm_ring_manifold(n)
    manifold = ed.ground_manifold(ising_ring_matrix(n, 1.0))
    assert manifold.degeneracy == 2 * n
    span = vs @ vs.T
    other = manifold.vectors @ manifold.vectors.conj().T
    assert np.allclose(span, other, atol=1e-9)


# -- tracing out a region --------------------------------------------------


def qutrit_pair_states() -> np.ndarray:
    def basis(i, dim):
        v = np.zeros(dim)
        v[i] = 1.0
        return v

    cols = []
    for triple in [(0, 1, 2), (1, 3, 0), (2, 5, 4), (3, 4, 5)]:
        v = sum(np.kron(basis(s, 3), basis(b, 6)) for s, b in enumerate(triple))
        cols.append(v / np.sqrt(3.0))
    return np.stack(cols, axis=1)


def test_orthogonal_environments_are_distinguishable():
    def basis(i, dim):
        v = np.zeros(dim)
        v[i] = 1.0
        return v

    vs = np.stack(
        [
            np.kron(basis(0, 2), basis(0, 4)),
            np.kron(basis(0, 2), basis(1, 4)),
        ],
        axis=1,
    )
    rep = analysis.bipartite_distinguishable(vs, [0], dims=(2, 2, 2))
    assert rep.distinguishable
    assert rep.smallest_sv > 0.1
    assert rep.witness is None


def test_four_state_manifold_hides_a_mixture():
    vs = qutrit_pair_states()
    rep = analysis.bipartite_distinguishable(vs, [0], dims=(3, 6))
    assert not rep.distinguishable
    assert rep.smallest_sv < 1e-9
    mats = [vs[:, k].reshape(3, 6) for k in range(4)]

    def traced_combo(c):
        return sum(
            c[i, j] * (mats[i].T @ mats[j].conj()) for i in range(4) for j in range(4)
        )

    assert np.linalg.norm(traced_combo(rep.witness)) < 1e-8
    alternating = np.diag([1.0, -1.0, -1.0, 1.0])
    assert np.linalg.norm(traced_combo(alternating)) < 1e-12


def test_macroscopic_pair_is_opaque_to_one_site():
    neel = np.zeros((16, 2))
    neel[0b0101, 0] = 1.0
    neel[0b1010, 1] = 1.0
    rep = analysis.bipartite_distinguishable(neel, [0], dims=2)
    assert not rep.distinguishable
    mats = [neel[:, k].reshape(2, 8) for k in range(2)]
    combo = sum(
        rep.witness[i, j] * (mats[i].T @ mats[j].conj())
        for i in range(2)
        for j in range(2)
    )
    assert np.linalg.norm(combo) < 1e-8


def test_single_state_manifold_is_distinguishable():
    rep = analysis.bipartite_distinguishable(ghz(4), [0, 1], dims=2)
    assert rep.distinguishable


def test_degenerate_region_arguments_are_rejected():
    with pytest.raises(ValueError):
        analysis.bipartite_distinguishable(ghz(3), [], dims=2)
    with pytest.raises(ValueError):
        analysis.bipartite_distinguishable(ghz(3), [0, 1, 2], dims=2)


# -- classification --------------------------------------------------------


def test_ferro_ring_is_frustration_free():
    rep = analysis.classify(models.build_ising(4, coupling=-1.0, periodic=True))
    assert rep.label == "FFS"


def test_frustrated_odd_ring_is_steerable_with_jitter():
    rep = analysis.classify(models.build_ising(5, coupling=1.0, periodic=True))
    assert rep.label == "NFFJS"
    assert "reason" in rep.evidence


def test_heisenberg_ring_is_not_steerable():
    rep = analysis.classify(models.build_heisenberg(5, periodic=True), max_window=3)
    assert rep.label == "NFFNS"
    assert rep.evidence["p"] > 1e-9
    assert rep.evidence["degeneracy"] == 4


def test_dense_ferro_matrix_has_exact_local_parent():
    rep = analysis.classify(ising_ring_matrix(4, -1.0), dims=(2, 2, 2, 2), max_window=2)
    assert rep.label == "NFFSS"
    assert rep.evidence["parent_window"] == 2


def test_term_decomposition_detects_frustration_freeness():
    terms = [((s, (s + 1) % 4), -np.kron(Z, Z)) for s in range(4)]
    rep = analysis.classify(
        ising_ring_matrix(4, -1.0), dims=(2, 2, 2, 2), term_decomposition=terms
    )
    assert rep.label == "FFS"
    assert rep.evidence["frustration_free"]
