"""Passive steering of commuting Pauli Hamiltonians to their ground space.

The protocol never reads out the system. Each step measures one term
H^(j) through a channel that keeps the wanted outcome and otherwise
applies a Pauli flip V chosen to anticommute with a prescribed subset of
terms, so the term-eigenvalue bit vector v moves by a known XOR pattern.
A GF(2) Heisenberg picture tracks how v depends on the unknown initial
sector; once that dependence dies out the sector is known exactly and a
greedy descent walks it into the ground set.

Term indices here are canonical (pivot-first) positions; results that
leave the library are mapped back through the Hamiltonian's permutation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import cph, gf2, pauli

__all__ = [
    "SteeringDescriptor",
    "Superoperator",
    "HeisenbergState",
    "ProtocolResult",
    "construct_flip_operator",
    "make_superoperator",
    "apply",
    "initial_state",
    "heisenberg_step",
    "sector_bits",
    "run_protocol",
    "clifford_dilation",
    "alternative_superoperator",
    "heating_recovery_check",
    "CPTP_TOL",
]

CPTP_TOL = 1e-12
EXACT_MODE_CAP = 12


@dataclass(frozen=True)
class SteeringDescriptor:
    """One protocol step: measure term j, keep outcome sign, flip with V.

    e_CVH are the free coordinates of the intended XOR pattern; the
    pattern itself is e_CVH @ A0.
    """

    j: int
    sign: int
    e_CVH: np.ndarray
    V: pauli.PauliOp


@dataclass(frozen=True)
class Superoperator:
    """Kraus pair on the listed support qubits (dense 2^s matrices)."""

    kraus: tuple
    descriptor: SteeringDescriptor | None
    support: tuple


@dataclass
class ProtocolResult:
    converged: bool
    final_energy: float | None
    ground_energy: float | None
    steps_used: int
    trajectory: list
    final_bits: np.ndarray | None
    gs_population: float | None
    mode: str
    incomplete_reason: str | None = None

    def to_json(self) -> str:
        def clean(x):
            if isinstance(x, np.ndarray):
                return [int(b) for b in x]
            if isinstance(x, (np.floating, float)):
                return float(x)
            if isinstance(x, (np.integer, int)):
                return int(x)
            return x

        payload = {
            "converged": self.converged,
            "final_energy": clean(self.final_energy),
            "ground_energy": clean(self.ground_energy),
            "steps_used": self.steps_used,
            "gs_population": clean(self.gs_population),
            "mode": self.mode,
            "incomplete_reason": self.incomplete_reason,
            "final_bits": clean(self.final_bits),
            "trajectory": [
                {k: clean(v) for k, v in row.items()} for row in self.trajectory
            ],
        }
        return json.dumps(payload, indent=1)


# -- flip operator construction ------------------------------------------


def pattern_of(h: cph.CommutingHamiltonian, e_CVH: np.ndarray) -> np.ndarray:
    """XOR pattern on the terms induced by free coordinates e_CVH."""
    e = gf2.asbits(e_CVH)
    return gf2.matmul(e[None, :], h.A0)[0] if e.size else np.zeros(h.N, dtype=np.uint8)


def anticommutation_pattern(h: cph.CommutingHamiltonian, op: pauli.PauliOp) -> np.ndarray:
    """Bit i set when op anticommutes with canonical term i."""
    return np.array(
        [0 if pauli.commutes(op, t) else 1 for t in h.terms], dtype=np.uint8
    )


def construct_flip_operator(
    h: cph.CommutingHamiltonian,
    g_VH: np.ndarray | None = None,
    e_CVH: np.ndarray | None = None,
    locality_budget: int | None = None,
) -> tuple[pauli.PauliOp, bool]:
    """Pauli V anticommuting with exactly the terms flagged in the pattern.

    Exactly one of g_VH (full pattern over canonical terms) or e_CVH (free
    coordinates) must be given. The linear system is solved over GF(2) and
    the support is then greedily reduced using operators that commute with
    every term. Returns (V, within_budget); the flag is False when a
    locality budget was requested and missed, which is advisory only.

    Raises:
        ValueError: when both or neither pattern argument is given, or the
            pattern violates a term relation (then no Pauli realizes it).
    """
    if (g_VH is None) == (e_CVH is None):
        raise ValueError("give exactly one of g_VH or e_CVH")
    if e_CVH is not None:
        g = pattern_of(h, e_CVH)
    else:
        g = gf2.asbits(g_VH)
        if g.shape[0] != h.N:
            raise ValueError(f"pattern length {g.shape[0]}, expected {h.N}")
        if np.any(gf2.matmul(h.C_H, g)):
            raise ValueError(
                "pattern violates a term relation; no Pauli can realize it"
            )
    M_P = np.stack([t.symplectic for t in h.terms])
    n = h.n
    # (M_P J) u lists anticommutations of the Pauli with symplectic u.
    MJ = np.concatenate([M_P[:, n:], M_P[:, :n]], axis=1)
    u = gf2.solve(MJ, g)
    if u is None:
        raise AssertionError("feasible pattern produced no solution")
    null = gf2.right_null_space(MJ)

    def supp_size(vec):
        return int(np.count_nonzero(vec[:n] | vec[n:]))

    improved = True
    while improved:
        improved = False
        for w in null:
            if supp_size(u ^ w) < supp_size(u):
                u = u ^ w
                improved = True
    x, z = u[:n], u[n:]
    V = pauli.PauliOp(x, z, int(x @ z) % 2)
    within = True
    if locality_budget is not None and supp_size(u) > locality_budget:
        within = False
    if not np.array_equal(anticommutation_pattern(h, V), g):
        raise AssertionError("constructed operator has the wrong pattern")
    return V, within


# -- channel construction -------------------------------------------------


def _restrict(op: pauli.PauliOp, support: tuple) -> pauli.PauliOp:
    idx = np.array(support, dtype=np.int64)
    return pauli.PauliOp(op.x[idx], op.z[idx], op.phase)


def make_superoperator(
    h: cph.CommutingHamiltonian,
    descriptor: SteeringDescriptor,
    cap: int = pauli.MATERIALIZE_CAP,
) -> Superoperator:
    """Dense Kraus pair realizing one steering step on its support.

    With V anticommuting with the measured term the channel is
    {P_sign, P_sign V}: both operators land in the kept eigenspace, so the
    measured bit becomes deterministic. Otherwise the channel is
    {P_sign, V P_other}: the wrong outcome is flipped by V without moving
    the measured bit. Completeness is verified to 1e-12 and any violation
    is a fault.
    """
    term = h.terms[descriptor.j]
    g = pattern_of(h, descriptor.e_CVH)
    support = tuple(sorted(set(term.support()) | set(descriptor.V.support())))
    if not support:
        support = (0,)
    if len(support) > cap:
        raise ValueError(f"support size {len(support)} exceeds cap {cap}")
    t_r = pauli.materialize(_restrict(term, support))
    v_r = pauli.materialize(_restrict(descriptor.V, support))
    dim = t_r.shape[0]
    sgn = 1.0 if descriptor.sign == 0 else -1.0
    p_keep = (np.eye(dim) + sgn * t_r) / 2.0
    p_other = (np.eye(dim) - sgn * t_r) / 2.0
    if g[descriptor.j]:
        kraus = (p_keep, p_keep @ v_r)
    else:
        kraus = (p_keep, v_r @ p_other)
    total = sum(k.conj().T @ k for k in kraus)
    dev = np.abs(total - np.eye(dim)).max()
    if dev > CPTP_TOL:
        raise AssertionError(f"Kraus completeness violated by {dev:.3e}")
    return Superoperator(kraus, descriptor, support)


def _apply_kraus(rho: np.ndarray, kraus, support: tuple, n: int) -> np.ndarray:
    """Contract a support-local Kraus set against a full 2^n density matrix."""
    s = len(support)
    rest = [q for q in range(n) if q not in support]
    perm = list(support) + rest
    t = rho.reshape([2] * (2 * n))
    t = t.transpose([*perm, *[n + q for q in perm]])
    block = t.reshape(1 << s, 1 << (n - s), 1 << s, 1 << (n - s))
    out = np.zeros_like(block)
    for k in kraus:
        out += np.einsum("ab,bxcy,dc->axdy", k, block, k.conj())
    inv = np.argsort(perm)
    t = out.reshape([2] * (2 * n)).transpose([*inv, *[n + int(q) for q in inv]])
    return np.ascontiguousarray(t.reshape(1 << n, 1 << n))


def apply(superop: Superoperator, rho: np.ndarray, n: int) -> np.ndarray:
    """Channel action sum_k K rho K^dagger on an n-qubit density matrix."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (1 << n, 1 << n):
        raise ValueError(f"density matrix shape {rho.shape} does not match n={n}")
    return _apply_kraus(rho, superop.kraus, superop.support, n)


# -- symbolic Heisenberg tracking ----------------------------------------


@dataclass
class HeisenbergState:
    """GF(2) record of how the sector bits depend on the initial sector.

    Mprod is the accumulated product of per-step update matrices; P and f
    collect the measurement-record contributions. The published blocks
    A_C, B_C and p_dp are derived views.
    """

    h: cph.CommutingHamiltonian
    Mprod: np.ndarray
    P: np.ndarray
    f: np.ndarray
    step: int = 0

    @property
    def A_C(self) -> np.ndarray:
        return gf2.matmul(self.Mprod, self.h.A0)

    @property
    def B_C(self) -> np.ndarray:
        return self.h.B0 ^ gf2.matmul(self.P, self.h.A0)

    @property
    def p_dp(self) -> np.ndarray:
        f = self.f[None, :]
        return gf2.matmul(f, self.h.A0)[0] if self.f.size else np.zeros(self.h.N, np.uint8)

    def scrambled(self) -> bool:
        """True when the final sector no longer depends on the start."""
        return not np.any(self.Mprod)


def initial_state(h: cph.CommutingHamiltonian) -> HeisenbergState:
    free = h.N - h.d_r
    return HeisenbergState(
        h,
        np.eye(free, dtype=np.uint8),
        np.zeros((h.d_r, free), dtype=np.uint8),
        np.zeros(free, dtype=np.uint8),
        0,
    )


def heisenberg_step(state: HeisenbergState, descriptor: SteeringDescriptor) -> HeisenbergState:
    """Advance the symbolic record by one step (state is not mutated)."""
    h = state.h
    free = h.N - h.d_r
    jc = descriptor.j
    a0j = h.A0[:, jc]
    b0j = h.B0[:, jc]
    e = gf2.asbits(descriptor.e_CVH)
    if e.shape[0] != free:
        raise ValueError(f"e_CVH length {e.shape[0]}, expected {free}")
    Mq = (np.eye(free, dtype=np.uint8) ^ np.outer(a0j, e)) % 2
    Mq = Mq.astype(np.uint8)
    new_M = gf2.matmul(state.Mprod, Mq)
    new_P = (np.outer(b0j, e).astype(np.uint8) ^ gf2.matmul(state.P, Mq))
    sig = np.uint8(descriptor.sign % 2)
    f_row = state.f[None, :]
    fM = gf2.matmul(f_row, Mq)[0] if free else state.f
    new_f = ((sig * e) ^ fM).astype(np.uint8)
    return HeisenbergState(h, new_M, new_P, new_f, state.step + 1)


def sector_bits(state: HeisenbergState) -> np.ndarray:
    """Current sector bit vector implied by the measurement record.

    Only meaningful once the state is scrambled; before that the value
    corresponds to a start in the canonical particular sector, since the
    sector of an arbitrary start differs by its coordinates times A_C.
    """
    h = state.h
    x = gf2.matmul(h.p_ph[None, :], state.B_C)[0] if h.d_r else np.zeros(h.N, np.uint8)
    return (x ^ state.p_dp).astype(np.uint8)


# -- protocol driver ------------------------------------------------------


def _ground_projector(h: cph.CommutingHamiltonian) -> np.ndarray:
    _, sectors = cph.ground_sectors(h)
    dim = 1 << h.n
    proj = np.zeros((dim, dim), dtype=np.complex128)
    for v in sectors:
        proj += cph.eigenspace_projector(h, v)
    return proj


def _random_descriptor(h, rng, v_cache) -> SteeringDescriptor:
    free = h.N - h.d_r
    while True:
        e = rng.integers(0, 2, size=free, dtype=np.uint8)
        if free == 0 or np.any(e):
            break
    j = int(rng.integers(h.N))
    sign = int(rng.integers(2))
    V = _cached_flip(h, e, v_cache)
    return SteeringDescriptor(j, sign, e, V)


def _cached_flip(h, e, cache) -> pauli.PauliOp:
    key = e.tobytes()
    if key not in cache:
        cache[key], _ = construct_flip_operator(h, e_CVH=e)
    return cache[key]


def run_protocol(
    h: cph.CommutingHamiltonian,
    seed: int = 0,
    max_steps: int = 10_000,
    mode: str = "exact",
    target_energy: float | None = None,
    rho0: np.ndarray | None = None,
    record_trajectory: bool = True,
) -> ProtocolResult:
    """Blind two-stage steering run.

    Stage one applies random steps until the symbolic record pins the
    sector, falling back to a deterministic zeroing sequence if random
    scrambling stalls. Stage two performs greedy XOR descent on the known
    sector, accepting equal-energy moves so different seeds wander to
    different ground sectors. Recorded energies are the post-step sector
    energies and never increase.

    mode "exact" additionally evolves a density matrix (maximally mixed
    unless rho0 is given) and reports ground-space population per step;
    "symbolic" skips state evolution entirely.
    """
    if mode not in ("exact", "symbolic"):
        raise ValueError(f"mode must be 'exact' or 'symbolic', got {mode!r}")
    if mode == "exact" and h.n > EXACT_MODE_CAP:
        raise ValueError(
            f"{h.n} qubits exceeds exact-mode cap {EXACT_MODE_CAP}; use symbolic mode"
        )
    rng = np.random.default_rng(seed)
    free = h.N - h.d_r

    ground_energy = target_energy
    if ground_energy is None and free <= cph.SPECTRUM_CAP and h.N <= 64:
        ground_energy = cph.ground_energy_search(h).energy

    rho = None
    proj_gs = None
    if mode == "exact":
        dim = 1 << h.n
        rho = np.eye(dim, dtype=np.complex128) / dim if rho0 is None else rho0.astype(np.complex128)
        proj_gs = _ground_projector(h)

    state = initial_state(h)
    v_cache: dict = {}
    trajectory: list[dict] = []
    steps = 0

    def population() -> float | None:
        if rho is None:
            return None
        return float(np.real(np.trace(proj_gs @ rho)))

    def push(row):
        if record_trajectory:
            trajectory.append(row)

    def do_step(desc: SteeringDescriptor, stage: int, energy):
        nonlocal state, rho, steps
        state = heisenberg_step(state, desc)
        if rho is not None:
            sop = make_superoperator(h, desc)
            rho = apply(sop, rho, h.n)
        steps += 1
        push(
            {
                "step": steps,
                "stage": stage,
                "j": int(h.perm[desc.j]),
                "sign": desc.sign,
                "energy": energy,
                "gs_population": population(),
            }
        )

    # Stage 1: scramble away the initial-sector dependence.
    stall_cap = 10 * max(free, 1)
    randoms = 0
    while not state.scrambled() and steps < max_steps:
        if randoms < stall_cap:
            desc = _random_descriptor(h, rng, v_cache)
            randoms += 1
        else:
            # Deterministic zeroing sequence: term d_r + k with basis
            # direction k projects out free coordinate k.
            k = steps % max(free, 1)
            e = np.zeros(free, dtype=np.uint8)
            e[k] = 1
            desc = SteeringDescriptor(
                h.d_r + k, int(rng.integers(2)), e, _cached_flip(h, e, v_cache)
            )
        do_step(desc, 1, None)

    if not state.scrambled():
        return ProtocolResult(
            False, None, ground_energy, steps, trajectory, None,
            population(), mode, "stage 1 did not scramble within max_steps",
        )

    v = sector_bits(state)
    energy = h.energy_of(v)
    push(
        {
            "step": steps, "stage": 2, "j": None, "sign": None,
            "energy": energy, "gs_population": population(),
        }
    )

    def converged_now() -> bool:
        return ground_energy is not None and energy <= ground_energy + 1e-9

    # Stage 2: greedy descent with plateau jitter.
    plateau = 0
    plateau_patience = 4 * max(free, 1) + 8
    reason = None
    while not converged_now() and steps < max_steps:
        if free == 0:
            reason = "no free coordinates; spectrum has a single sector"
            break
        deltas = np.empty(free)
        for k in range(free):
            deltas[k] = h.energy_of(v ^ h.A0[k]) - energy
        best = float(deltas.min())
        if best > 1e-12:
            # try paired moves before declaring a dead end
            pair = _best_pair(h, v, energy, free)
            if pair is None:
                reason = "greedy descent reached a local minimum"
                break
            e = pair
        elif best < -1e-12:
            choices = np.nonzero(deltas <= best + 1e-12)[0]
            k = int(rng.choice(choices))
            e = np.zeros(free, dtype=np.uint8)
            e[k] = 1
        else:
            plateau += 1
            if plateau > plateau_patience:
                reason = "exhausted plateau moves without improvement"
                break
            choices = np.nonzero(np.abs(deltas) <= 1e-12)[0]
            k = int(rng.choice(choices))
            e = np.zeros(free, dtype=np.uint8)
            e[k] = 1
        g = pattern_of(h, e)
        flip_sites = np.nonzero(g)[0]
        j = int(rng.choice(flip_sites))
        sign = int(v[j] ^ 1)
        desc = SteeringDescriptor(j, sign, e, _cached_flip(h, e, v_cache))
        new_v = v ^ g
        new_energy = h.energy_of(new_v)
        if new_energy < energy - 1e-12:
            plateau = 0
        do_step(desc, 2, new_energy)
        v, energy = new_v, new_energy

    ok = converged_now()
    if not ok and reason is None:
        reason = "step budget exhausted"
    gs_pop = population()
    return ProtocolResult(
        ok, energy, ground_energy, steps, trajectory,
        h.to_original_order(v), gs_pop, mode, None if ok else reason,
    )


def _best_pair(h, v, energy, free) -> np.ndarray | None:
    if free > 64:
        return None
    for k in range(free):
        for l in range(k + 1, free):
            e = np.zeros(free, dtype=np.uint8)
            e[k] = e[l] = 1
            if h.energy_of(v ^ pattern_of(h, e)) < energy - 1e-12:
                return e
    return None


# -- unitary dilation -----------------------------------------------------


def clifford_dilation(
    h: cph.CommutingHamiltonian,
    descriptor: SteeringDescriptor,
    cap: int = pauli.MATERIALIZE_CAP,
) -> tuple[np.ndarray, tuple]:
    """Single-ancilla unitary whose |0> block reproduces the channel.

    The ancilla is prepended as the first (most significant) qubit and
    starts in |0>. Returns (U, support) where U is dense on the ancilla
    plus the channel support, and Kraus operators are recovered as
    <a|U|0> for ancilla outcomes a.
    """
    term = h.terms[descriptor.j]
    g = pattern_of(h, descriptor.e_CVH)
    support = tuple(sorted(set(term.support()) | set(descriptor.V.support())))
    if not support:
        support = (0,)
    if len(support) + 1 > cap:
        raise ValueError(f"dilation size {len(support) + 1} exceeds cap {cap}")
    t_r = pauli.materialize(_restrict(term, support))
    v_r = pauli.materialize(_restrict(descriptor.V, support))
    dim = t_r.shape[0]
    sgn = 1.0 if descriptor.sign == 0 else -1.0
    p_keep = (np.eye(dim) + sgn * t_r) / 2.0
    p_other = (np.eye(dim) - sgn * t_r) / 2.0
    U = np.zeros((2 * dim, 2 * dim), dtype=np.complex128)
    if g[descriptor.j]:
        U[:dim, :dim] = p_keep
        U[:dim, dim:] = p_other
        U[dim:, :dim] = p_keep @ v_r
        U[dim:, dim:] = p_other @ v_r
    else:
        U[:dim, :dim] = p_keep
        U[:dim, dim:] = p_other
        U[dim:, :dim] = v_r @ p_other
        U[dim:, dim:] = v_r @ p_keep
    dev = np.abs(U.conj().T @ U - np.eye(2 * dim)).max()
    if dev > 1e-10:
        raise AssertionError(f"dilation not unitary (deviation {dev:.3e})")
    return U, support


# -- three-operator variant for XX chains --------------------------------


def alternative_superoperator(h: cph.CommutingHamiltonian, i: int) -> Superoperator:
    """Three-Kraus steering step for a uniform XX chain.

    Requires every term to be +X X on adjacent qubits. Uses the parity
    check Z_i Z_{i+1} to split the flipped branch, giving Kraus
    {P_minus, P_minus V Q_minus, P_minus V Q_plus} with V = Z on the
    right qubit. Any other Hamiltonian shape is rejected.
    """
    terms = h.original_terms()
    for k, t in enumerate(terms):
        sup = t.support()
        ok = (
            len(sup) == 2
            and sup[1] == sup[0] + 1
            and t.sign() == 1
            and np.all(t.z == 0)
            and t.x[sup[0]] == 1
            and t.x[sup[1]] == 1
        )
        if not ok:
            raise ValueError(
                f"term {k} ({t.to_string()}) is not an adjacent +XX pair; "
                "this construction only covers uniform XX chains"
            )
    if not 0 <= i < len(terms):
        raise ValueError(f"term index {i} out of range")
    q0 = terms[i].support()[0]
    support = (q0, q0 + 1)
    X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    xx = np.kron(X, X)
    zz = np.kron(Z, Z)
    v = np.kron(np.eye(2), Z)
    p_minus = (np.eye(4) - xx) / 2.0
    q_minus = (np.eye(4) - zz) / 2.0
    q_plus = (np.eye(4) + zz) / 2.0
    kraus = (p_minus, p_minus @ v @ q_minus, p_minus @ v @ q_plus)
    total = sum(k.conj().T @ k for k in kraus)
    dev = np.abs(total - np.eye(4)).max()
    if dev > CPTP_TOL:
        raise AssertionError(f"Kraus completeness violated by {dev:.3e}")
    return Superoperator(kraus, None, support)


# -- heating suppression --------------------------------------------------


@dataclass
class HeatingReport:
    error: str
    affected_terms: list
    correction: SteeringDescriptor | None
    restored: bool
    max_deviation: float
    expectations_before: np.ndarray = field(repr=False, default=None)
    expectations_after: np.ndarray = field(repr=False, default=None)


def heating_recovery_check(
    h: cph.CommutingHamiltonian,
    error: pauli.PauliOp,
    seed: int = 0,
    tol: float = 1e-9,
) -> HeatingReport:
    """Verify that one steering step undoes a Pauli error on a ground state.

    The error's anticommutation pattern is itself a realizable flip
    pattern, so the correction measures one affected term with the sign
    the ground sector had before the error and flips with a V matching
    the pattern. Errors commuting with every term need no correction.
    """
    if error.n != h.n:
        raise ValueError(f"error acts on {error.n} qubits, expected {h.n}")
    g = anticommutation_pattern(h, error)
    affected = [int(h.perm[i]) for i in np.nonzero(g)[0]]

    e_min, sectors = cph.ground_sectors(h)
    rng = np.random.default_rng(seed)
    v = sectors[int(rng.integers(len(sectors)))]
    basis = cph.eigenspace_basis(h, v)
    rho = (basis @ basis.conj().T) / basis.shape[1]
    rho = rho.astype(np.complex128)

    mats = [pauli.materialize(t) for t in h.terms]

    def expectations(r):
        return np.array([np.real(np.trace(m @ r)) for m in mats])

    before = expectations(rho)
    err_mat = pauli.materialize(error)
    rho_err = err_mat @ rho @ err_mat.conj().T
    rho_err = rho_err / np.real(np.trace(rho_err))

    if not np.any(g):
        after = expectations(rho_err)
        dev = float(np.abs(after - before).max(initial=0.0))
        return HeatingReport(
            error.to_string(), affected, None, dev <= tol, dev, before, after
        )

    # free coordinates of the pattern: with A0 = (R^T | I) they are just
    # the non-pivot entries of g
    e = g[h.d_r:]
    if not np.array_equal(pattern_of(h, e), g):
        raise AssertionError("error pattern is not realizable; relation data corrupt")
    V, _ = construct_flip_operator(h, e_CVH=e)
    i = int(np.nonzero(g)[0][0])
    sign = int(v[i])
    desc = SteeringDescriptor(i, sign, e, V)
    sop = make_superoperator(h, desc)
    rho_fixed = apply(sop, rho_err, h.n)
    after = expectations(rho_fixed)
    dev = float(np.abs(after - before).max(initial=0.0))
    return HeatingReport(
        error.to_string(), affected, desc, dev <= tol, dev, before, after
    )
