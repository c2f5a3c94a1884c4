r"""Pauli-group algebra and Pauli-transfer-matrix (PTM) conventions.

Every module in the package shares the conventions fixed here:

* An ``n``-qubit Pauli string is indexed in base 4 with qubit 0 the most
  significant digit and ``I=0, X=1, Y=2, Z=3``.  Index 0 is ``I...I``.
* The dense matrix of a Pauli string is the Kronecker product of its letters
  in qubit order, so index arithmetic and ``np.kron`` agree.
* ``vec`` stacks columns.
* The PTM of a channel ``E`` on ``n`` qubits is the real ``4^n x 4^n`` matrix

  .. math:: [C]_{ij} = 2^{-n}\,\mathrm{Tr}\{S_i\,E(S_j)\}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, InvalidChannelError

LETTERS = "IXYZ"
_LETTER_INDEX = {c: i for i, c in enumerate(LETTERS)}

# Single-qubit products P_a P_b = phase * P_c, keyed by (a, b).
_MUL_TABLE: dict[tuple[int, int], tuple[complex, int]] = {}
for _a in range(4):
    _MUL_TABLE[(0, _a)] = (1, _a)
    _MUL_TABLE[(_a, 0)] = (1, _a)
    _MUL_TABLE[(_a, _a)] = (1, 0)
for _a, _b, _c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
    _MUL_TABLE[(_a, _b)] = (1j, _c)
    _MUL_TABLE[(_b, _a)] = (-1j, _c)

# Imaginary residue tolerated when collapsing a PTM to real numbers.
PTM_IMAG_TOL = 1e-12
MAX_QUBITS = 4

SINGLE_QUBIT_PAULIS = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class PauliString:
    """An ``n``-qubit Pauli operator without phase, e.g. ``PauliString("XZ")``."""

    letters: str

    def __post_init__(self):
        letters = self.letters.upper()
        if not letters or any(c not in _LETTER_INDEX for c in letters):
            raise ValueError(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def digits(self) -> tuple[int, ...]:
        return tuple(_LETTER_INDEX[c] for c in self.letters)

    @property
    def index(self) -> int:
        idx = 0
        for d in self.digits:
            idx = 4 * idx + d
        return idx

    @classmethod
    def from_index(cls, index: int, n: int) -> PauliString:
        if n < 1:
            raise DimensionError("a Pauli string needs at least one qubit")
        if not 0 <= index < 4**n:
            raise ValueError(f"index {index} out of range for {n} qubits")
        digits = []
        for _ in range(n):
            index, d = divmod(index, 4)
            digits.append(LETTERS[d])
        return cls("".join(reversed(digits)))

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for d in self.digits:
            out = np.kron(out, SINGLE_QUBIT_PAULIS[d])
        return out

    def __str__(self) -> str:
        return self.letters


@dataclass(frozen=True)
class PhasedPauli:
    """A Pauli string times a phase in ``{+1, -1, +i, -i}``."""

    phase: complex
    pauli: PauliString

    def __post_init__(self):
        if self.phase not in (1, -1, 1j, -1j):
            raise ValueError(f"phase must be a fourth root of unity, got {self.phase}")

    def matrix(self) -> np.ndarray:
        return self.phase * self.pauli.matrix()

    def __mul__(self, other: PhasedPauli) -> PhasedPauli:
        prod = pauli_mul(self.pauli, other.pauli)
        return PhasedPauli(_unit(self.phase * other.phase * prod.phase), prod.pauli)


def _unit(z: complex) -> complex:
    # keep phases exact members of {1, -1, 1j, -1j}
    return complex(round(z.real), round(z.imag))


def pauli_mul(a: PauliString, b: PauliString) -> PhasedPauli:
    """Group product ``a * b`` with its phase."""
    if a.n != b.n:
        raise DimensionError(f"cannot multiply {a.n}-qubit and {b.n}-qubit Paulis")
    phase: complex = 1
    letters = []
    for da, db in zip(a.digits, b.digits):
        ph, dc = _MUL_TABLE[(da, db)]
        phase *= ph
        letters.append(LETTERS[dc])
    return PhasedPauli(_unit(phase), PauliString("".join(letters)))


@lru_cache(maxsize=None)
def product_index_table(n: int) -> np.ndarray:
    """``table[i, j] = l`` where ``P_i P_j`` equals ``P_l`` up to phase.

    With the base-4 convention the single-qubit phase-free product is the XOR of
    the two digits (I=00, X=01, Y=10, Z=11), and the n-qubit product is the
    digit-wise XOR, i.e. the XOR of the two indices.
    """
    idx = np.arange(4**n)
    table = np.bitwise_xor.outer(idx, idx)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def pauli_matrices(n: int) -> tuple[np.ndarray, ...]:
    """Dense matrices of all ``4^n`` Pauli strings in canonical order."""
    _check_n(n)
    mats: list[np.ndarray] = [np.ones((1, 1), dtype=complex)]
    for _ in range(n):
        mats = [np.kron(m, s) for m in mats for s in SINGLE_QUBIT_PAULIS]
    for m in mats:
        m.setflags(write=False)
    return tuple(mats)


@lru_cache(maxsize=None)
def _transition(n: int) -> np.ndarray:
    """Columns ``vec(S_i)/sqrt(2^n)``; unitary ``4^n x 4^n`` change of basis."""
    d = 2**n
    t = np.column_stack([vec(s) for s in pauli_matrices(n)]) / math.sqrt(d)
    t.setflags(write=False)
    return t


def _check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DimensionError(f"qubit count must be a positive integer, got {n!r}")
    if n > MAX_QUBITS:
        raise DimensionError(f"at most {MAX_QUBITS} qubits are supported, got {n}")


def qubits_for_dim(dim: int) -> int:
    """Qubit count ``n`` with ``2^n == dim``."""
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 1 or 2**n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two >= 2")
    return n


def qubits_for_ptm(size: int) -> int:
    """Qubit count ``n`` with ``4^n == size``."""
    n = qubits_for_dim(int(round(math.sqrt(size)))) if size > 0 else 0
    if 4**n != size:
        raise DimensionError(f"PTM size {size} is not a power of four")
    return n


@dataclass(frozen=True, eq=False)
class PTMChannel:
    """A channel in Pauli-transfer-matrix form.

    ``m`` is the real ``4^n x 4^n`` PTM. ``kraus`` keeps an operator-sum form
    when one is known; it is informational and never consulted for algebra.
    """

    m: np.ndarray
    n: int
    kraus: tuple[np.ndarray, ...] | None = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        _check_n(self.n)
        if m.shape != (4**self.n, 4**self.n):
            raise DimensionError(
                f"PTM for {self.n} qubit(s) must be {4**self.n}x{4**self.n}, got {m.shape}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def from_matrix(cls, m, name: str = "") -> PTMChannel:
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"PTM must be square, got shape {m.shape}")
        return cls(m, qubits_for_ptm(m.shape[0]), name=name)

    @property
    def dim(self) -> int:
        return 4**self.n

    def is_trace_preserving(self, atol: float = 1e-10) -> bool:
        first = np.zeros(self.dim)
        first[0] = 1.0
        return bool(np.allclose(self.m[0], first, atol=atol, rtol=0))

    def is_diagonal(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.m - np.diag(np.diag(self.m)), 0, atol=atol, rtol=0))

    def is_lower_triangular(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(np.triu(self.m, 1), 0, atol=atol, rtol=0))

    def allclose(self, other: PTMChannel, atol: float = 1e-10) -> bool:
        return self.n == other.n and bool(np.allclose(self.m, other.m, atol=atol, rtol=0))

    def __matmul__(self, other: PTMChannel) -> PTMChannel:
        if not isinstance(other, PTMChannel):
            return NotImplemented
        if other.n != self.n:
            raise DimensionError(f"cannot compose {self.n}- and {other.n}-qubit channels")
        return PTMChannel(self.m @ other.m, self.n)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"PTMChannel(n={self.n}{label})"


def identity_channel(n: int = 1) -> PTMChannel:
    _check_n(n)
    return PTMChannel(np.eye(4**n), n, name="identity")


def pauli_ptm(p: PauliString | str) -> PTMChannel:
    """PTM of conjugation by a Pauli string: diagonal with ``+/-1`` entries.

    The entry for ``S_j`` is ``+1`` when ``S_j`` commutes with ``p`` and ``-1``
    otherwise.
    """
    if isinstance(p, str):
        p = PauliString(p)
    diag = np.ones(1)
    for d in p.digits:
        diag = np.kron(diag, _single_pauli_diag(d))
    return PTMChannel(np.diag(diag), p.n, kraus=(p.matrix(),), name=str(p))


def _single_pauli_diag(d: int) -> np.ndarray:
    # column d of the single-qubit Hadamard transform matrix
    return _H1[:, d].astype(float)


_H1 = np.array(
    [
        [1, 1, 1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, -1, -1, 1],
    ]
)
_H1.setflags(write=False)


@lru_cache(maxsize=None)
def hadamard_matrix(n: int) -> np.ndarray:
    """``H_n = H_1^{(x)n}``; column ``j`` is the PTM diagonal of Pauli ``j``.

    ``H_n @ H_n == 4^n I`` and ``H_n`` maps a Pauli error distribution to the
    diagonal of the channel's PTM.
    """
    if n < 1:
        raise DimensionError(f"qubit count must be >= 1, got {n}")
    h = np.ones((1, 1))
    for _ in range(n):
        h = np.kron(h, _H1)
    h = h.astype(float)
    h.setflags(write=False)
    return h


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    m = np.asarray(m)
    if m.ndim != 2:
        raise DimensionError(f"vec expects a matrix, got ndim={m.ndim}")
    return m.reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`. ``dim`` defaults to ``sqrt(len(v))``."""
    v = np.asarray(v)
    if v.ndim != 1:
        raise DimensionError("unvec expects a vector")
    if dim is None:
        dim = int(round(math.sqrt(v.size)))
    if dim <= 0 or v.size % dim or dim * dim != v.size:
        raise DimensionError(f"length {v.size} is not a {dim}x{dim} matrix")
    return v.reshape((dim, v.size // dim), order="F")


def superoperator_of_kraus(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Column-stacked superoperator ``sum_k conj(K_k) (x) K_k``."""
    return sum(np.kron(np.conj(k), k) for k in kraus)


def _as_kraus_list(kraus: Iterable) -> list[np.ndarray]:
    mats = [np.asarray(k, dtype=complex) for k in kraus]
    if not mats:
        raise InvalidChannelError("at least one Kraus operator is required")
    shape = mats[0].shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise DimensionError(f"Kraus operators must be square, got {shape}")
    if any(k.shape != shape for k in mats):
        raise DimensionError("Kraus operators must share one shape")
    return mats


def ptm_of_kraus(kraus: Iterable, name: str = "") -> PTMChannel:
    """PTM of the operator-sum map ``rho -> sum_k K_k rho K_k^dagger``."""
    mats = _as_kraus_list(kraus)
    n = qubits_for_dim(mats[0].shape[0])
    _check_n(n)
    t = _transition(n)
    c = t.conj().T @ superoperator_of_kraus(mats) @ t
    residue = np.max(np.abs(c.imag)) if c.size else 0.0
    if residue > PTM_IMAG_TOL:
        raise InvalidChannelError(
            f"PTM has imaginary residue {residue:.3e}; the Kraus set is not Hermiticity-preserving"
        )
    return PTMChannel(c.real, n, kraus=tuple(mats), name=name)


def ptm_of_unitary(u: np.ndarray, name: str = "") -> PTMChannel:
    return ptm_of_kraus([u], name=name)


def superoperator_of_ptm(c: PTMChannel) -> np.ndarray:
    """Column-stacked superoperator of a PTM (inverse of the Pauli basis change)."""
    t = _transition(c.n)
    return t @ c.m @ t.conj().T


def apply_ptm_to_operator(c: PTMChannel, rho: np.ndarray) -> np.ndarray:
    """Action of the channel on a ``2^n x 2^n`` operator."""
    d = 2**c.n
    return unvec(superoperator_of_ptm(c) @ vec(np.asarray(rho, dtype=complex)), d)


@dataclass(frozen=True, eq=False)
class DensityVector:
    """PTM coordinates ``x_i = Tr{S_i rho} / sqrt(2^n)`` of a density matrix."""

    n: int
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.shape != (4**self.n,):
            raise DimensionError(f"expected a length-{4**self.n} vector, got {x.shape}")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    def expectation(self, p: PauliString | int) -> float:
        """``Tr{P rho}`` for a Pauli string (or its index)."""
        idx = p.index if isinstance(p, PauliString) else int(p)
        return float(math.sqrt(2**self.n) * self.x[idx])

    @property
    def trace(self) -> float:
        return self.expectation(0)


def state_to_vector(rho: np.ndarray, atol: float = 1e-10) -> DensityVector:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got {rho.shape}")
    n = qubits_for_dim(rho.shape[0])
    _check_n(n)
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise ValueError(f"density matrix has trace {tr}, expected 1")
    x = np.array([np.trace(s @ rho).real for s in pauli_matrices(n)]) / math.sqrt(2**n)
    return DensityVector(n, x)


def vector_to_state(v: DensityVector) -> np.ndarray:
    scale = 1.0 / math.sqrt(2**v.n)
    return scale * sum(xi * s for xi, s in zip(v.x, pauli_matrices(v.n)))


def zero_state(n: int) -> DensityVector:
    """``|0...0><0...0|``: the Z-type strings (letters I/Z only) all have expectation 1."""
    _check_n(n)
    x = np.zeros(4**n)
    for idx in range(4**n):
        if all(d in (0, 3) for d in PauliString.from_index(idx, n).digits):
            x[idx] = 1.0
    return DensityVector(n, x / math.sqrt(2**n))
