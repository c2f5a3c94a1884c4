r"""Quasi-probability decomposition of inverse channels and the sampling overhead factor.

Three independent routes to the SOF ``gamma = ||mu||_1^2 - 1`` are provided:

* :func:`quasi_probability` solves ``B mu = vec(C^{-1})`` against a full basis
  of implementable operations (``16^n`` columns);
* :func:`reduced_pauli_qp` uses the Hadamard structure of Pauli channels,
  ``mu = H_n^{-1} (1 / (H_n eta))``;
* :func:`prw_qp` inverts the Pauli-random-walk matrix ``[C]_{ij} = eta_{l}``
  with ``P_i P_j = P_l`` and reads off its first column.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .channels import PauliChannelEta, _as_eta, ptm_to_eta
from .errors import DimensionError, IllConditioned, SingularChannel
from .pauli import (
    SINGLE_QUBIT_PAULIS,
    PTMChannel,
    hadamard_matrix,
    product_index_table,
    ptm_of_kraus,
    unvec,
    vec,
)

CHANNEL_COND_LIMIT = 1e12
RESIDUAL_TOL = 1e-9
PRUNE_TOL = 1e-14

_I, _X, _Y, _Z = SINGLE_QUBIT_PAULIS
_R2 = 1 / math.sqrt(2)

# The sixteen single-qubit operations: Paulis, pi/2 rotations, pi rotations
# about the diagonal axes, and the projective measurements (kept outcome).
STANDARD_OPERATIONS: tuple[tuple[str, np.ndarray], ...] = (
    ("I", _I),
    ("X", _X),
    ("Y", _Y),
    ("Z", _Z),
    ("R_x", _R2 * (_I + 1j * _X)),
    ("R_y", _R2 * (_I + 1j * _Y)),
    ("R_z", _R2 * (_I + 1j * _Z)),
    ("R_yz", _R2 * (_Y + _Z)),
    ("R_xz", _R2 * (_X + _Z)),
    ("R_xy", _R2 * (_X + _Y)),
    ("pi_x", 0.5 * (_I + _X)),
    ("pi_y", 0.5 * (_I + _Y)),
    ("pi_z", 0.5 * (_I + _Z)),
    ("pi_yz", 0.5 * (_Y + 1j * _Z)),
    ("pi_xz", 0.5 * (_X + 1j * _Z)),
    ("pi_xy", 0.5 * (_X + 1j * _Y)),
)


@dataclass(frozen=True, eq=False)
class BasisOperation:
    """One implementable operation: a name and its Kraus operators."""

    name: str
    kraus: tuple[np.ndarray, ...]

    @cached_property
    def ptm(self) -> PTMChannel:
        return ptm_of_kraus(self.kraus, name=self.name)


@dataclass(frozen=True, eq=False)
class BasisSet:
    """Columns ``vec(PTM)`` of ``16^n`` operations; the first ``4^n`` are the Paulis."""

    n: int
    operations: tuple[BasisOperation, ...]
    basis_id: str = "custom"
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        size = 16**self.n
        if len(self.operations) != size:
            raise DimensionError(f"{self.n}-qubit basis needs {size} operations, got {len(self.operations)}")
        b = np.column_stack([vec(op.ptm.m) for op in self.operations])
        b.setflags(write=False)
        object.__setattr__(self, "matrix", b)

    @property
    def names(self) -> list[str]:
        return [op.name for op in self.operations]

    @cached_property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))

    @cached_property
    def _lu(self):
        if not np.isfinite(self.condition_number) or self.condition_number > CHANNEL_COND_LIMIT:
            raise IllConditioned(f"basis {self.basis_id} has condition number {self.condition_number:.3e}")
        return sla.lu_factor(self.matrix)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return sla.lu_solve(self._lu, rhs)

    def ptm(self, k: int) -> PTMChannel:
        return self.operations[k].ptm


@lru_cache(maxsize=None)
def standard_basis(n: int = 1) -> BasisSet:
    """The sixteen-operation single-qubit basis, or its pairwise tensor products for ``n = 2``.

    Two-qubit columns are ordered with the first qubit's operation major.
    """
    if n not in (1, 2):
        raise DimensionError(f"the standard basis is available for n = 1 or 2, got {n}")
    singles = [BasisOperation(name, (k,)) for name, k in STANDARD_OPERATIONS]
    if n == 1:
        return BasisSet(1, tuple(singles), basis_id="std16")
    ops = []
    for a, b in itertools.product(singles, repeat=2):
        kraus = tuple(np.kron(ka, kb) for ka in a.kraus for kb in b.kraus)
        ops.append(BasisOperation(f"{a.name}*{b.name}", kraus))
    basis = BasisSet(2, tuple(ops), basis_id="std16x2")
    # Pauli x Pauli products sit at op1*16 + op2 for op1, op2 < 4; move them to the front.
    return _paulis_first(basis)


def _paulis_first(basis: BasisSet) -> BasisSet:
    n = basis.n
    order = []
    for p in range(4**n):
        digits = [(p >> (2 * (n - 1 - q))) & 3 for q in range(n)]
        idx = 0
        for d in digits:
            idx = 16 * idx + d
        order.append(idx)
    rest = [k for k in range(16**n) if k not in set(order)]
    ops = tuple(basis.operations[k] for k in order + rest)
    return BasisSet(n, ops, basis_id=basis.basis_id)


@dataclass(frozen=True)
class CPTNIReport:
    max_eigenvalues: np.ndarray
    failing: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failing

    def __bool__(self) -> bool:
        return self.ok


def validate_cptni(basis: BasisSet, atol: float = 1e-12) -> CPTNIReport:
    """Check ``sum_k K_k^dagger K_k <= I`` for every basis operation."""
    lams = []
    failing = []
    for op in basis.operations:
        gram = sum(k.conj().T @ k for k in op.kraus)
        lam = float(np.linalg.eigvalsh(0.5 * (gram + gram.conj().T)).max())
        lams.append(lam)
        if lam > 1 + atol:
            failing.append(op.name)
    return CPTNIReport(np.array(lams), tuple(failing))


@dataclass(frozen=True, eq=False)
class QuasiProbability:
    """Coefficients of the inverse channel over a basis."""

    mu: np.ndarray
    basis_id: str
    reduced: bool = False

    @property
    def one_norm(self) -> float:
        return float(np.abs(self.mu).sum())

    @property
    def sof(self) -> float:
        return self.one_norm**2 - 1.0


def sof(mu: QuasiProbability | np.ndarray) -> float:
    """Sampling overhead factor ``||mu||_1^2 - 1``."""
    if isinstance(mu, QuasiProbability):
        return mu.sof
    return float(np.abs(np.asarray(mu)).sum() ** 2 - 1.0)


def circuit_sof(gammas: Sequence[float]) -> float:
    """Overhead of a whole circuit: ``prod(1 + gamma_i) - 1``."""
    return float(np.prod([1.0 + g for g in gammas]) - 1.0)


def inverse_ptm(c: PTMChannel) -> np.ndarray:
    """``C^{-1}`` by a pivoted LU solve, refusing singular or ill-conditioned channels."""
    cond = np.linalg.cond(c.m)
    if not np.isfinite(cond):
        raise SingularChannel(f"channel {c.name or ''} is not invertible")
    if cond > CHANNEL_COND_LIMIT:
        raise IllConditioned(f"channel condition number {cond:.3e} exceeds {CHANNEL_COND_LIMIT:g}")
    try:
        lu = sla.lu_factor(c.m, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover - guarded by cond
        raise SingularChannel(str(exc)) from exc
    return sla.lu_solve(lu, np.eye(c.dim))


def quasi_probability(c: PTMChannel, basis: BasisSet | None = None) -> QuasiProbability:
    """``mu = B^{-1} vec(C^{-1})`` with a residual check on the basis solve."""
    basis = basis or standard_basis(c.n)
    if basis.n != c.n:
        raise DimensionError(f"{c.n}-qubit channel against a {basis.n}-qubit basis")
    target = vec(inverse_ptm(c))
    mu = basis.solve(target)
    residual = np.max(np.abs(basis.matrix @ mu - target))
    if residual > RESIDUAL_TOL:
        raise IllConditioned(f"basis solve residual {residual:.3e} exceeds {RESIDUAL_TOL:g}")
    return QuasiProbability(mu, basis.basis_id)


def pauli_diagonal_sof_batch(diagonals: np.ndarray, basis: BasisSet | None = None) -> np.ndarray:
    """Full-basis SOF for many Pauli channels given their PTM diagonals (rows).

    Each ``vec(diag(1/d))`` right-hand side is solved against the cached LU of
    the basis; the batch shares one factorization.
    """
    diagonals = np.atleast_2d(np.asarray(diagonals, dtype=float))
    dim = diagonals.shape[1]
    n = int(round(math.log(dim, 4)))
    basis = basis or standard_basis(n)
    if np.any(np.abs(diagonals) < 1.0 / CHANNEL_COND_LIMIT):
        raise SingularChannel("a Pauli channel has a zero PTM diagonal entry")
    rhs = np.zeros((dim * dim, diagonals.shape[0]))
    rhs[np.arange(dim) * (dim + 1)] = (1.0 / diagonals).T
    mu = basis.solve(rhs)
    return np.abs(mu).sum(axis=0) ** 2 - 1.0


def reduced_pauli_qp(eta) -> QuasiProbability:
    """Reduced representation over the ``4^n`` Pauli operations: ``H^{-1}(1/(H eta))``."""
    e = _as_eta(eta)
    d = e.diagonal()
    if np.any(np.abs(d) < 1.0 / CHANNEL_COND_LIMIT):
        raise SingularChannel("Pauli channel has a zero PTM diagonal entry")
    h = hadamard_matrix(e.n)
    mu = h @ (1.0 / d) / 4**e.n
    return QuasiProbability(mu, "pauli-reduced", reduced=True)


def prw_matrix(eta) -> np.ndarray:
    """Pauli-random-walk matrix ``[C]_{ij} = eta_l`` where ``P_i P_j = P_l`` up to phase."""
    e = _as_eta(eta)
    return e.eta[product_index_table(e.n)]


def prw_adjacency(eta) -> np.ndarray:
    """Off-diagonal part ``A`` of the PRW matrix, ``C = (1 - eps) I + A``."""
    c = prw_matrix(eta)
    return c - np.diag(np.diag(c))


def prw_qp(eta) -> QuasiProbability:
    """Solve ``C_PRW mu = e_1``."""
    c = prw_matrix(eta)
    alpha = np.zeros(c.shape[0])
    alpha[0] = 1.0
    cond = np.linalg.cond(c)
    if not np.isfinite(cond) or cond > CHANNEL_COND_LIMIT:
        raise SingularChannel(f"PRW matrix is singular (condition number {cond:.3e})")
    mu = sla.lu_solve(sla.lu_factor(c), alpha)
    return QuasiProbability(mu, "pauli-prw", reduced=True)


def embed_reduced(qp: QuasiProbability, n: int) -> np.ndarray:
    """Place a reduced (Pauli-only) vector into the ``16^n`` full-basis layout."""
    full = np.zeros(16**n)
    full[: 4**n] = qp.mu
    return full


def channel_sof(c: PTMChannel, basis: BasisSet | None = None) -> float:
    """SOF of any channel; Pauli channels beyond the full-basis range use the reduced route."""
    if c.n > 2 and basis is None:
        return reduced_pauli_qp(ptm_to_eta(c)).sof
    return quasi_probability(c, basis).sof


@dataclass(frozen=True, eq=False)
class SamplingPlan:
    """Candidate operations drawn with probability ``p_k``; outcomes weighted by ``w_k``."""

    probs: np.ndarray
    weights: np.ndarray
    indices: np.ndarray
    names: tuple[str, ...]
    ptms: tuple[np.ndarray, ...] = field(repr=False)
    n: int = 1

    @property
    def one_norm(self) -> float:
        return float(np.abs(self.weights[0])) if len(self.weights) else 0.0

    def reconstruct(self) -> np.ndarray:
        """``sum_k p_k w_k M_k``, which equals the inverse channel's PTM."""
        return sum(p * w * m for p, w, m in zip(self.probs, self.weights, self.ptms))


def sampling_plan(mu: QuasiProbability, basis: BasisSet | None = None) -> SamplingPlan:
    norm = mu.one_norm
    if norm <= 0:
        raise ValueError("quasi-probability vector is zero")
    if mu.reduced:
        n = int(round(math.log(mu.mu.size, 4)))
        ptm_for = lambda k: np.diag(hadamard_matrix(n)[:, k])
        name_for = lambda k: _pauli_name(k, n)
    else:
        basis = basis or _basis_for(mu)
        if basis.matrix.shape[1] != mu.mu.size:
            raise DimensionError("quasi-probability vector does not match the basis")
        n = basis.n
        ptm_for = lambda k: unvec(basis.matrix[:, k], 4**n)
        name_for = lambda k: basis.operations[k].name
    keep = np.flatnonzero(np.abs(mu.mu) >= PRUNE_TOL)
    coeffs = mu.mu[keep]
    kept_norm = float(np.abs(coeffs).sum())
    probs = np.abs(coeffs) / kept_norm
    weights = np.sign(coeffs) * kept_norm
    return SamplingPlan(
        probs=probs,
        weights=weights,
        indices=keep,
        names=tuple(name_for(k) for k in keep),
        ptms=tuple(ptm_for(k) for k in keep),
        n=n,
    )


def plan_for_channel(c: PTMChannel, basis: BasisSet | None = None) -> SamplingPlan:
    """Mitigation plan for a channel (full basis for ``n <= 2``, reduced Pauli otherwise)."""
    if c.n > 2 and basis is None:
        return sampling_plan(reduced_pauli_qp(ptm_to_eta(c)))
    basis = basis or standard_basis(c.n)
    return sampling_plan(quasi_probability(c, basis), basis)


def _basis_for(mu: QuasiProbability) -> BasisSet:
    for n in (1, 2):
        if mu.mu.size == 16**n and mu.basis_id == standard_basis(n).basis_id:
            return standard_basis(n)
    raise ValueError(f"no registered basis {mu.basis_id!r}; pass it explicitly")


def _pauli_name(k: int, n: int) -> str:
    from .pauli import PauliString

    return str(PauliString.from_index(k, n))


__all__ = [
    "STANDARD_OPERATIONS",
    "BasisOperation",
    "BasisSet",
    "CPTNIReport",
    "QuasiProbability",
    "SamplingPlan",
    "standard_basis",
    "validate_cptni",
    "quasi_probability",
    "inverse_ptm",
    "sof",
    "circuit_sof",
    "channel_sof",
    "pauli_diagonal_sof_batch",
    "reduced_pauli_qp",
    "prw_matrix",
    "prw_adjacency",
    "prw_qp",
    "embed_reduced",
    "sampling_plan",
    "plan_for_channel",
    "PauliChannelEta",
]
