"""Model builders: spin chains, random fermion models, lattices, configs."""

import numpy as np
import pytest
import scipy.sparse

from steerkit import ed, models
from steerkit.runner import ConfigError


def commutator_norm(a, b) -> float:
    a = scipy.sparse.csr_matrix(a)
    b = scipy.sparse.csr_matrix(b)
    diff = a @ b - b @ a
    return float(np.abs(diff).max()) if diff.nnz else 0.0


def test_spin_matrices_algebra():
    for s in (0.5, 1.0, 1.5, 2.0):
        sx, sy, sz = models.spin_matrices(s)
        d = int(2 * s + 1)
        assert sx.shape == (d, d)
        comm = sx @ sy - sy @ sx
        assert np.allclose(comm, 1j * sz, atol=1e-12)
        casimir = sx @ sx + sy @ sy + sz @ sz
        assert np.allclose(casimir, s * (s + 1) * np.eye(d), atol=1e-12)


def test_spin_matrices_reject_bad_spin():
    with pytest.raises(ValueError):
        models.spin_matrices(0.7)


def test_open_pair_ground_energy():
    model = models.build_heisenberg(2, periodic=False)
    man = ed.ground_manifold(model.matrix)
    assert man.energy == pytest.approx(-0.75, abs=1e-12)


def test_heisenberg_symmetries_commute():
    for n, periodic in ((4, True), (5, True), (4, False)):
        model = models.build_heisenberg(n, periodic=periodic)
        for op in model.meta["basis_ops"]:
            assert commutator_norm(model.matrix, op) < 1e-10


def test_heisenberg_spin_one_dimension():
    model = models.build_heisenberg(3, spin=1.0)
    assert model.matrix.shape == (27, 27)
    assert model.local_dim == 3


def test_syk_dirac_conserves_number():
    model = models.build_syk(6, seed=4)
    number = ed.fermion_matrix(
        model.m,
        [ed.FermionTerm(1.0, ((j, True), (j, False))) for j in range(model.m)],
    )
    assert commutator_norm(model.matrix(), number) < 1e-10
    assert model.meta["half_filling"] == 3


def test_syk_majorana_conserves_parity_only():
    model = models.build_syk(8, variant="majorana", seed=4)
    m = model.m
    number = ed.fermion_matrix(
        m, [ed.FermionTerm(1.0, ((j, True), (j, False))) for j in range(m)]
    )
    nmat = number.toarray()
    h = model.matrix().toarray()
    assert commutator_norm(h, nmat) > 1e-6
    parity = np.diag(np.where(np.diag(nmat).real % 2 < 0.5, 1.0, -1.0))
    assert commutator_norm(h, parity) < 1e-10


def test_syk_disorder_reproducible():
    a = models.build_syk(7, seed=123).matrix().toarray()
    b = models.build_syk(7, seed=123).matrix().toarray()
    c = models.build_syk(7, seed=124).matrix().toarray()
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)


def test_syk_mode_caps():
    with pytest.raises(ValueError):
        models.build_syk(16)
    with pytest.raises(ValueError):
        models.build_syk(13, variant="majorana")


def test_hubbard_bond_structure():
    model = models.build_fermi_hubbard(3, 3, periodic=True)
    assert model.meta["sites"] == 9
    assert len(model.meta["bonds"]) == 18
    assert model.m == 18
    open_model = models.build_fermi_hubbard(3, 3, periodic=False)
    assert len(open_model.meta["bonds"]) == 12


def test_hubbard_small_lattice_no_double_bonds():
    model = models.build_fermi_hubbard(2, 2, periodic=True)
    assert len(model.meta["bonds"]) == 4
    assert len(set(model.meta["bonds"])) == 4


def test_hubbard_interaction_energy():
    # Lone doubly occupied site at U with no hopping contributes exactly U.
    model = models.build_fermi_hubbard(2, 1, t=0.0, u=3.5, periodic=False)
    basis = ed.spin_sector(2, 1, 1)
    vals = np.sort(np.diag(model.matrix(basis).toarray()).real)
    assert vals.tolist() == pytest.approx([0.0, 0.0, 3.5, 3.5])


def test_hubbard_translation_signs_are_unitary():
    basis = ed.number_sector(4, 2)
    perm = np.array([1, 0, 3, 2])
    op = models._mode_permutation_matrix(4, perm, basis)
    assert np.abs((op.T @ op - scipy.sparse.identity(basis.size))).max() < 1e-12
    assert set(np.unique(op.data)) <= {1.0, -1.0}


def test_translation_rejects_open_sector():
    # A sector basis that is not closed under the permutation must fault.
    basis = ed.number_sector(4, 2)[:3]
    with pytest.raises(ValueError):
        models._mode_permutation_matrix(4, np.array([1, 2, 3, 0]), basis)


def test_build_from_config_kinds():
    heis = models.build_from_config(
        {"kind": "heisenberg", "params": {"n": 3}}
    )
    assert isinstance(heis, models.SpinModel)
    ising = models.build_from_config(
        {"kind": "ising", "params": {"n": 4, "coupling": -1.0}}
    )
    assert ising.N == 4
    syk = models.build_from_config(
        {"kind": "syk", "params": {"n": 5, "seed": 2}}
    )
    assert syk.label == "syk"
    fh = models.build_from_config(
        {"kind": "fermi_hubbard", "params": {"lx": 2, "ly": 2}}
    )
    assert fh.label == "fermi_hubbard"


def test_build_from_config_rejects_unknown_kind():
    with pytest.raises(ConfigError) as err:
        models.build_from_config({"kind": "bogus"})
    assert "kind" in str(err.value)


def test_build_from_config_reports_missing_field():
    with pytest.raises(ConfigError) as err:
        models.build_from_config({"kind": "heisenberg", "params": {}})
    assert "n" in str(err.value)


def test_commuting_pauli_config_round_trip():
    cfg = {
        "kind": "commuting_pauli",
        "params": {
            "terms": [
                {"pauli": "ZZI", "coeff": 1.0},
                {"pauli": "IZZ", "coeff": 1.0},
                {"pauli": "ZIZ", "coeff": 1.0},
            ]
        },
    }
    h = models.build_from_config(cfg)
    assert h.n == 3 and h.N == 3
    assert h.to_term_dicts()[0]["pauli"].lstrip("+-") == "ZZI"
