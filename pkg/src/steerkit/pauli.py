"""Pauli-group arithmetic in binary symplectic form.

An n-qubit Pauli is stored as ``i^phase * X^x Z^z`` with per-qubit X-then-Z
ordering: ``x`` and ``z`` are length-n bit vectors and ``phase`` is an
exponent of i, kept mod 4 so non-Hermitian intermediates stay exact.
Qubit 0 is the leftmost character of the text form and the most significant
tensor factor of the materialization.

The text format used by config files is a sign prefix followed by one of
``I X Y Z`` per qubit, e.g. ``-ZZI``.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from . import gf2

__all__ = [
    "PauliOp",
    "identity",
    "from_string",
    "multiply",
    "commutes",
    "pairing",
    "materialize",
    "symplectic_form",
    "MATERIALIZE_CAP",
]

MATERIALIZE_CAP = 14

_CHARS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS = {v: k for k, v in _CHARS.items()}

# Single-qubit X^x Z^z factors (phase handled globally).
_FACTORS = {
    (0, 0): np.eye(2, dtype=np.complex128),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=np.complex128),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=np.complex128),
    (1, 1): np.array([[0, -1], [1, 0]], dtype=np.complex128),  # X @ Z
}


class PauliOp:
    """Immutable Pauli group element ``i^phase * X^x Z^z``."""

    __slots__ = ("n", "x", "z", "phase")

    def __init__(self, x, z, phase: int = 0):
        x = gf2.asbits(x, ndim=1)
        z = gf2.asbits(z, ndim=1)
        if x.shape != z.shape:
            raise ValueError("x and z bit vectors must have equal length")
        x.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "n", int(x.shape[0]))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", int(phase) % 4)

    def __setattr__(self, name, value):
        raise AttributeError("PauliOp is immutable")

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliOp):
            return NotImplemented
        return (
            self.n == other.n
            and self.phase == other.phase
            and bool(np.array_equal(self.x, other.x))
            and bool(np.array_equal(self.z, other.z))
        )

    def __hash__(self) -> int:
        return hash((self.n, self.phase, self.x.tobytes(), self.z.tobytes()))

    def __repr__(self) -> str:
        if self.is_hermitian():
            return f"PauliOp({self.to_string()!r})"
        body = "".join(_BITS[(int(a), int(b))] for a, b in zip(self.x, self.z))
        return f"PauliOp(i^{self.phase}*{body})"

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        return multiply(self, other)

    @property
    def symplectic(self) -> np.ndarray:
        """Length-2n bit vector (x | z)."""
        return np.concatenate([self.x, self.z])

    def support(self) -> list[int]:
        """Qubit indices acted on non-trivially."""
        return [int(q) for q in np.nonzero(self.x | self.z)[0]]

    def is_identity_string(self) -> bool:
        return not np.any(self.x | self.z)

    def xz_overlap(self) -> int:
        """Integer count of qubits where both x and z bits are set."""
        return int(np.sum(self.x & self.z))

    def is_hermitian(self) -> bool:
        return self.phase % 2 == self.xz_overlap() % 2

    def adjoint(self) -> "PauliOp":
        return PauliOp(self.x, self.z, -self.phase + 2 * self.xz_overlap())

    def sign(self) -> int:
        """+1 or -1 for a Hermitian operator; fault otherwise."""
        if not self.is_hermitian():
            raise ValueError("sign is defined only for Hermitian Paulis")
        return 1 if self.phase == self.xz_overlap() % 4 else -1

    def with_sign(self, sign: int) -> "PauliOp":
        """Hermitian copy with the requested overall sign."""
        base = self.xz_overlap() % 4
        return PauliOp(self.x, self.z, base if sign >= 0 else base + 2)

    def to_string(self) -> str:
        """Sign-prefixed text form, defined for Hermitian operators."""
        body = "".join(_BITS[(int(a), int(b))] for a, b in zip(self.x, self.z))
        prefix = {1: "+", -1: "-"}[self.sign()]
        return prefix + body


def identity(n: int) -> PauliOp:
    return PauliOp(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8), 0)


def from_string(s: str) -> PauliOp:
    """Parse the sign-prefixed text form; a missing sign means +."""
    s = s.strip()
    if not s:
        raise ValueError("empty Pauli string")
    sign = 1
    if s[0] in "+-":
        sign = 1 if s[0] == "+" else -1
        s = s[1:]
    # Accept a unicode minus from copy-pasted sources.
    if s and s[0] == "−":
        sign = -1
        s = s[1:]
    if not s:
        raise ValueError("Pauli string has a sign but no body")
    x = np.zeros(len(s), dtype=np.uint8)
    z = np.zeros(len(s), dtype=np.uint8)
    for q, ch in enumerate(s.upper()):
        if ch not in _CHARS:
            raise ValueError(f"invalid Pauli character {ch!r} at position {q}")
        x[q], z[q] = _CHARS[ch]
    return PauliOp(x, z, 0).with_sign(sign)


def multiply(p: PauliOp, q: PauliOp) -> PauliOp:
    """Exact group product; phases pass through +-i when needed.

    Moving Z^z1 across X^x2 contributes (-1)^(z1.x2), hence the 2*(z1.x2)
    term in the i-exponent.
    """
    if p.n != q.n:
        raise ValueError(f"qubit count mismatch: {p.n} vs {q.n}")
    cross = int(p.z.astype(np.int64) @ q.x.astype(np.int64))
    return PauliOp(p.x ^ q.x, p.z ^ q.z, p.phase + q.phase + 2 * cross)


def pairing(p: PauliOp, q: PauliOp) -> int:
    """Symplectic pairing bit; 0 exactly when the operators commute."""
    if p.n != q.n:
        raise ValueError(f"qubit count mismatch: {p.n} vs {q.n}")
    s = int(p.x.astype(np.int64) @ q.z.astype(np.int64))
    s += int(p.z.astype(np.int64) @ q.x.astype(np.int64))
    return s & 1


def commutes(p: PauliOp, q: PauliOp) -> bool:
    return pairing(p, q) == 0


def symplectic_form(n: int) -> np.ndarray:
    """The 2n x 2n block form [[0, I], [I, 0]] over GF(2).

    ``pairing(p, q) == (p.symplectic @ J @ q.symplectic) mod 2``.
    """
    j = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    j[:n, n:] = np.eye(n, dtype=np.uint8)
    j[n:, :n] = np.eye(n, dtype=np.uint8)
    return j


def materialize(p: PauliOp, cap: int = MATERIALIZE_CAP) -> np.ndarray:
    """Dense 2^n x 2^n complex matrix of the operator.

    Args:
        p: operator to expand.
        cap: qubit-count guard; exceeding it is a fault because the dense
            form grows as 4^n (consider working symbolically instead).
    """
    if p.n > cap:
        raise ValueError(
            f"materialize: {p.n} qubits exceeds cap {cap}; "
            "raise the cap only if the 2^n x 2^n dense form is really needed"
        )
    factors = [_FACTORS[(int(a), int(b))] for a, b in zip(p.x, p.z)]
    mat = reduce(np.kron, factors, np.eye(1, dtype=np.complex128))
    return (1j ** p.phase) * mat


def materialize_diagonal(p: PauliOp) -> np.ndarray:
    """Diagonal of a Z-type operator (x = 0) as a length-2^n real vector.

    Cheap path used for classical-basis Hamiltonians; faults when the
    operator has any X component or a complex overall phase.
    """
    if np.any(p.x):
        raise ValueError("materialize_diagonal requires a Z-type operator")
    if p.phase % 2:
        raise ValueError("operator has a complex phase; not diagonal-real")
    n = p.n
    idx = np.arange(1 << n, dtype=np.uint64)
    zmask = np.uint64(0)
    for q in range(n):
        if p.z[q]:
            zmask |= np.uint64(1) << np.uint64(n - 1 - q)
    par = _popcount(idx & zmask) & 1
    diag = 1.0 - 2.0 * par
    if p.phase == 2:
        diag = -diag
    return diag


def _popcount(a: np.ndarray) -> np.ndarray:
    """Vectorized popcount for uint64 arrays."""
    a = a.astype(np.uint64, copy=True)
    m1 = np.uint64(0x5555555555555555)
    m2 = np.uint64(0x3333333333333333)
    m4 = np.uint64(0x0F0F0F0F0F0F0F0F)
    h01 = np.uint64(0x0101010101010101)
    a -= (a >> np.uint64(1)) & m1
    a = (a & m2) + ((a >> np.uint64(2)) & m2)
    a = (a + (a >> np.uint64(4))) & m4
    return ((a * h01) >> np.uint64(56)).astype(np.int64)
