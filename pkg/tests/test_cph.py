"""Commuting Pauli Hamiltonians: relations, spectra, projectors."""

import numpy as np
import pytest

from steerkit import cph, ed, models, pauli


def triangle(sign: float = 1.0) -> cph.CommutingHamiltonian:
    return models.build_ising(3, coupling=sign, periodic=True)


def spectrum_multiset(h: cph.CommutingHamiltonian) -> dict[float, int]:
    out: dict[float, int] = {}
    for ev, mult in cph.enumerate_spectrum(h):
        key = round(ev.energy, 9)
        out[key] = out.get(key, 0) + mult
    return out


def test_triangle_relation_space():
    h = triangle()
    assert h.d_r == 1
    assert h.C_H.shape == (1, 3)
    assert h.C_H[0].tolist() == [1, 1, 1]
    assert h.p_ph.tolist() == [0]


def test_single_bond_has_no_relations():
    h = cph.build([pauli.from_string("ZZ")])
    assert h.d_r == 0
    assert h.C_H.shape[0] == 0


def test_frustrated_triangle_spectrum():
    assert spectrum_multiset(triangle(1.0)) == {3.0: 2, -1.0: 6}


def test_multiplicity_formula():
    h = triangle()
    for ev, mult in cph.enumerate_spectrum(h):
        assert mult == 2 ** (h.n - h.N + h.d_r)


def test_ring_ground_degeneracy_is_two_n():
    h = models.build_ising(5, coupling=1.0, periodic=True)
    e0, states = cph.ground_manifold_states(h)
    assert e0 == pytest.approx(-3.0, abs=1e-12)
    assert states.shape == (2**5, 10)
    overlap = states.conj().T @ states
    assert np.allclose(overlap, np.eye(10), atol=1e-10)


def test_ground_search_triangle_exact():
    res = cph.ground_energy_search(triangle())
    assert res.exact
    assert res.energy == pytest.approx(-1.0, abs=1e-12)
    assert res.vector.bits.sum() in (1, 2)
    assert res.degeneracy_sectors == 3


def test_ground_search_ferro_ring():
    h = models.build_ising(4, coupling=-1.0, periodic=True)
    res = cph.ground_energy_search(h)
    assert res.energy == pytest.approx(-4.0, abs=1e-12)
    assert res.exact


def test_ground_search_odd_ring():
    h = models.build_ising(7, coupling=1.0, periodic=True)
    res = cph.ground_energy_search(h)
    assert res.energy == pytest.approx(-5.0, abs=1e-12)


def test_energy_of_matches_weights():
    h = triangle()
    v = np.array([1, 1, 0], dtype=np.uint8)
    assert h.is_feasible(v)
    assert h.energy_of(v) == pytest.approx(-1.0)


def test_projector_trace_counts_states():
    h = triangle()
    seen = 0
    for ev, mult in cph.enumerate_spectrum(h):
        proj = cph.eigenspace_projector(h, ev.bits)
        assert np.allclose(proj, proj.conj().T, atol=1e-12)
        assert np.allclose(proj @ proj, proj, atol=1e-10)
        assert np.trace(proj).real == pytest.approx(mult, abs=1e-9)
        seen += mult
    assert seen == 2**h.n


def test_projector_rejects_infeasible_pattern():
    h = triangle()
    bad = np.array([1, 0, 0], dtype=np.uint8)
    assert not h.is_feasible(bad)
    with pytest.raises(ValueError):
        cph.eigenspace_projector(h, bad)


def test_eigenspace_basis_spans_projector():
    h = triangle()
    ev, mult = cph.enumerate_spectrum(h)[0]
    basis = cph.eigenspace_basis(h, ev.bits)
    assert basis.shape == (2**h.n, mult)
    assert np.allclose(basis.conj().T @ basis, np.eye(mult), atol=1e-10)
    hmat = h.materialize()
    assert np.allclose(hmat @ basis, ev.energy * basis, atol=1e-9)


def test_spectrum_cap_guard():
    # The sweep is over the N - d_r free coordinates; the triangle has two.
    with pytest.raises(ValueError):
        cph.enumerate_spectrum(triangle(), cap=1)
    assert len(cph.enumerate_spectrum(triangle(), cap=2)) == 4


def test_spectrum_matches_dense_diagonalization():
    # Twenty random commuting instances; the acceptance suite runs the
    # larger batch with the same oracle.
    for seed in range(20):
        n = 2 + seed % 4
        h = models.random_commuting(n, n + 1 + seed % 3, seed=seed)
        vals = np.concatenate(
            [np.full(m, ev.energy) for ev, m in cph.enumerate_spectrum(h)]
        )
        dense = ed.diagonalize(h.materialize(), compute_vectors=False).values
        assert np.allclose(np.sort(vals), dense, atol=1e-9)


def test_ground_sectors_exhaust_ground_space():
    h = models.build_ising(5, coupling=1.0, periodic=True)
    e0, sectors = cph.ground_sectors(h)
    assert e0 == pytest.approx(-3.0)
    # Five distinct bond patterns, each shared by two spin states.
    assert len(sectors) == 5
    assert len(sectors) * h.multiplicity() == 10
    for bits in sectors:
        assert h.is_feasible(bits)
        assert h.energy_of(bits) == pytest.approx(e0)


def test_order_round_trip():
    h = models.random_commuting(5, 6, seed=9)
    bits = np.array([1, 0, 1, 1, 0, 0], dtype=np.uint8)
    assert np.array_equal(h.from_original_order(h.to_original_order(bits)), bits)
    assert np.allclose(h.original_weights()[h.perm], h.weights)


def test_dump_load_round_trip(tmp_path):
    h = models.random_commuting(4, 5, seed=21)
    path = tmp_path / "h.json"
    cph.dump_hamiltonian(h, path)
    back = cph.load_hamiltonian(path)
    assert back.n == h.n and back.N == h.N
    assert spectrum_multiset(back) == spectrum_multiset(h)


def test_all_terms_commute_in_random_instances():
    for seed in range(10):
        h = models.random_commuting(6, 8, seed=seed)
        for i, a in enumerate(h.terms):
            for b in h.terms[i + 1 :]:
                assert pauli.commutes(a, b)
