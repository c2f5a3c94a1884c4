"""Channel models, channel algebra, quality metrics and the coherent/triangular split."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionError, InvalidChannelError
from .pauli import (
    PTMChannel,
    _check_n,
    hadamard_matrix,
    identity_channel,
    ptm_of_kraus,
    ptm_of_unitary,
    superoperator_of_ptm,
)

__all__ = [
    "PTMChannel",
    "PauliChannelEta",
    "CoherentTriangularParts",
    "ChannelQuality",
    "CPTPReport",
    "identity_channel",
    "depolarizing",
    "bit_flip",
    "phase_flip",
    "pauli_channel",
    "eta_to_ptm",
    "ptm_to_eta",
    "amplitude_damping",
    "axis_damping",
    "over_rotation",
    "over_rotation_angle",
    "unitary_channel",
    "tensor",
    "compose",
    "ggep",
    "avg_fidelity",
    "quality",
    "choi_matrix",
    "is_cptp",
    "coherent_triangular_decompose",
    "calibrate_to_ggep",
    "product_channel",
    "per_qubit_ggep",
    "random_cptp_channel",
    "random_triangular_channel",
]

ETA_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PauliChannelEta:
    """Probability vector over the ``4^n`` Pauli errors of a Pauli channel."""

    eta: np.ndarray
    n: int = 0

    def __post_init__(self):
        eta = np.array(self.eta, dtype=float).reshape(-1)
        n = self.n or _qubits_for_len(eta.size)
        if eta.size != 4**n:
            raise DimensionError(f"eta for {n} qubit(s) needs {4**n} entries, got {eta.size}")
        if np.any(eta < -ETA_TOL):
            raise InvalidChannelError(f"eta has negative entries: {eta.min():.3e}")
        if abs(eta.sum() - 1.0) > ETA_TOL:
            raise InvalidChannelError(f"eta sums to {eta.sum():.12f}, expected 1")
        eta = np.clip(eta, 0.0, None)
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "n", n)

    @property
    def ggep(self) -> float:
        return float(1.0 - self.eta[0])

    def diagonal(self) -> np.ndarray:
        """PTM diagonal ``H_n @ eta``."""
        return hadamard_matrix(self.n) @ self.eta


def _qubits_for_len(size: int) -> int:
    n = 1
    while 4**n < size:
        n += 1
    if 4**n != size:
        raise DimensionError(f"eta length {size} is not a power of four")
    return n


def _as_eta(eta) -> PauliChannelEta:
    return eta if isinstance(eta, PauliChannelEta) else PauliChannelEta(eta)


def eta_to_ptm(eta) -> PTMChannel:
    e = _as_eta(eta)
    return PTMChannel(np.diag(e.diagonal()), e.n, name="pauli")


def ptm_to_eta(c: PTMChannel, atol: float = 1e-12) -> PauliChannelEta:
    """Recover the error distribution of a Pauli (diagonal-PTM) channel.

    Entries in ``[-atol, 0)`` are clamped to zero; anything more negative means
    the diagonal does not describe a Pauli channel.
    """
    if not c.is_diagonal(atol=max(atol, 1e-12)):
        raise InvalidChannelError("channel PTM is not diagonal")
    eta = hadamard_matrix(c.n) @ np.diag(c.m) / 4**c.n
    if np.any(eta < -atol):
        raise InvalidChannelError(f"diagonal maps to negative error probabilities ({eta.min():.3e})")
    eta = np.clip(eta, 0.0, None)
    return PauliChannelEta(eta / eta.sum(), c.n)


def pauli_channel(eta) -> PTMChannel:
    return eta_to_ptm(eta)


def depolarizing(n: int, eps: float) -> PTMChannel:
    """Uniform Pauli errors with total mass ``eps`` (so the GGEP is ``eps``)."""
    _check_n(n)
    dim = 4**n
    if not 0.0 <= eps <= 1.0 - 1.0 / dim + 1e-15:
        raise ValueError(f"depolarizing GGEP must lie in [0, {1 - 1 / dim}], got {eps}")
    eta = np.full(dim, eps / (dim - 1))
    eta[0] = 1.0 - eps
    out = eta_to_ptm(PauliChannelEta(eta, n))
    return PTMChannel(out.m, n, name=f"depolarizing({eps:g})")


def _check_prob(p: float, what: str) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{what} must lie in [0, 1], got {p}")


def bit_flip(p: float) -> PTMChannel:
    _check_prob(p, "bit-flip probability")
    return PTMChannel(eta_to_ptm([1 - p, p, 0, 0]).m, 1, name=f"bit_flip({p:g})")


def phase_flip(p: float) -> PTMChannel:
    _check_prob(p, "phase-flip probability")
    return PTMChannel(eta_to_ptm([1 - p, 0, 0, p]).m, 1, name=f"phase_flip({p:g})")


def amplitude_damping(delta: float) -> PTMChannel:
    """Decay of ``|1>`` to ``|0>`` with probability ``delta``."""
    _check_prob(delta, "damping probability")
    e0 = np.array([[1, 0], [0, math.sqrt(1 - delta)]], dtype=complex)
    e1 = np.array([[0, math.sqrt(delta)], [0, 0]], dtype=complex)
    return ptm_of_kraus([e0, e1], name=f"amplitude_damping({delta:g})")


def axis_damping(delta: float, axis: int = 3, toward: int = 1) -> PTMChannel:
    """Amplitude damping toward the ``toward``-pole of Bloch axis ``axis`` (1=X, 2=Y, 3=Z).

    ``axis_damping(d, 3, +1)`` is :func:`amplitude_damping`. Every member is a
    lower-triangular CPTP channel.
    """
    _check_prob(delta, "damping probability")
    if axis not in (1, 2, 3) or toward not in (1, -1):
        raise ValueError("axis must be 1, 2 or 3 and toward must be +1 or -1")
    a = math.sqrt(1 - delta)
    m = np.diag([1.0, a, a, a])
    m[axis, axis] = 1 - delta
    m[axis, 0] = toward * delta
    return PTMChannel(m, 1, name=f"axis_damping({delta:g},{axis},{toward:+d})")


def over_rotation_angle(phi: float) -> float:
    """Bloch-sphere rotation angle of :func:`over_rotation` (twice the matrix half-angle ``4 phi / pi``)."""
    return 8.0 * phi / math.pi


def over_rotation(phi: float) -> PTMChannel:
    """Coherent X over-rotation ``U = [[cos a, i sin a], [i sin a, cos a]]`` with ``a = 4 phi / pi``."""
    a = 4.0 * phi / math.pi
    u = np.array([[math.cos(a), 1j * math.sin(a)], [1j * math.sin(a), math.cos(a)]])
    return ptm_of_unitary(u, name=f"over_rotation({phi:g})")


def unitary_channel(u: np.ndarray, name: str = "") -> PTMChannel:
    u = np.asarray(u, dtype=complex)
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-10):
        raise InvalidChannelError("matrix is not unitary")
    return ptm_of_unitary(u, name=name)


def tensor(channels: Sequence[PTMChannel]) -> PTMChannel:
    """Kronecker product in qubit order (first channel acts on qubit 0)."""
    channels = list(channels)
    if not channels:
        raise ValueError("tensor needs at least one channel")
    m = reduce(np.kron, (c.m for c in channels))
    n = sum(c.n for c in channels)
    return PTMChannel(m, n, name=" x ".join(c.name or "?" for c in channels))


def compose(outer: PTMChannel, inner: PTMChannel) -> PTMChannel:
    """``outer o inner``: apply ``inner`` first."""
    return outer @ inner


def ggep(c: PTMChannel) -> float:
    """Generalized gate error probability ``1 - Tr{C}/4^n``."""
    return float(1.0 - np.trace(c.m) / 4**c.n)


def avg_fidelity(c: PTMChannel) -> float:
    d = 2**c.n
    return float((np.trace(c.m) + d) / (d * d + d))


@dataclass(frozen=True)
class ChannelQuality:
    ggep: float
    avg_fidelity: float


def quality(c: PTMChannel) -> ChannelQuality:
    q = ChannelQuality(ggep(c), avg_fidelity(c))
    d = 2**c.n
    expected = (1 + d / d**2) * (1 - q.avg_fidelity)
    if abs(q.ggep - expected) > 1e-12:
        raise AssertionError("GGEP / average-fidelity relation violated")
    return q


def choi_matrix(c: PTMChannel) -> np.ndarray:
    """``J = sum_ij |i><j| (x) E(|i><j|)``; PSD iff the map is completely positive."""
    d = 2**c.n
    s = superoperator_of_ptm(c)
    # column i + j*d of the column-stacked superoperator is vec(E(|i><j|))
    blocks = s.reshape(d, d, d, d, order="F")  # [a, b, i, j] = E(|i><j|)[a, b]
    return blocks.transpose(2, 0, 3, 1).reshape(d * d, d * d)


@dataclass(frozen=True)
class CPTPReport:
    trace_preserving: bool
    min_choi_eigenvalue: float
    completely_positive: bool

    @property
    def ok(self) -> bool:
        return self.trace_preserving and self.completely_positive

    def __bool__(self) -> bool:
        return self.ok


def is_cptp(c: PTMChannel, atol: float = 1e-10) -> CPTPReport:
    j = choi_matrix(c)
    j = 0.5 * (j + j.conj().T)
    lam = float(np.linalg.eigvalsh(j).min())
    return CPTPReport(c.is_trace_preserving(atol), lam, lam >= -atol)


@dataclass(frozen=True)
class CoherentTriangularParts:
    """``C = u @ d @ v.T`` with ``u``, ``v`` rotations and ``d`` triangular."""

    u: PTMChannel
    d: PTMChannel
    v: PTMChannel

    def reconstruct(self) -> PTMChannel:
        return PTMChannel(self.u.m @ self.d.m @ self.v.m.T, self.d.n)


def coherent_triangular_decompose(c: PTMChannel | Sequence[PTMChannel]) -> CoherentTriangularParts:
    """Split a single-qubit TP channel into rotation, triangular part, rotation.

    Reflections from the SVD are folded into the last diagonal entry of the
    triangular part, so both coherent parts are proper rotations (SO(3)) and
    remain implementable as unitary gates. A sequence of single-qubit channels
    is treated as their tensor product and decomposed factor by factor.
    """
    if not isinstance(c, PTMChannel):
        parts = [coherent_triangular_decompose(f) for f in c]
        return CoherentTriangularParts(
            tensor([p.u for p in parts]), tensor([p.d for p in parts]), tensor([p.v for p in parts])
        )
    if c.n != 1:
        raise DimensionError("coherent/triangular split is defined for single-qubit channels")
    if not c.is_trace_preserving():
        raise InvalidChannelError("channel is not trace preserving")
    block = c.m[1:, 1:]
    b = c.m[1:, 0]
    if np.allclose(block, np.diag(np.diag(block)), atol=1e-14, rtol=0):
        u3 = v3 = np.eye(3)
        dvals = np.diag(block).copy()
    else:
        u3, dvals, vt = np.linalg.svd(block)
        v3 = vt.T
        if np.linalg.det(u3) < 0:
            u3[:, -1] *= -1
            dvals[-1] *= -1
        if np.linalg.det(v3) < 0:
            v3[:, -1] *= -1
            dvals[-1] *= -1
    u = np.eye(4)
    u[1:, 1:] = u3
    v = np.eye(4)
    v[1:, 1:] = v3
    d = np.eye(4)
    d[1:, 1:] = np.diag(dvals)
    d[1:, 0] = u3.T @ b
    return CoherentTriangularParts(PTMChannel(u, 1, name="U"), PTMChannel(d, 1, name="D"), PTMChannel(v, 1, name="V"))


# parameter range and constructor for each calibratable single-qubit model
_MODELS: dict[str, tuple[Callable[[float], PTMChannel], float, float]] = {
    "amplitude_damping": (amplitude_damping, 0.0, 1.0),
    "over_rotation": (over_rotation, 0.0, math.pi**2 / 8),
}


def calibrate_to_ggep(model: str, target_eps: float, n: int = 1, tol: float = 1e-12) -> float:
    """Model parameter whose channel has GGEP ``target_eps``.

    ``depolarizing`` is parametrized by its GGEP directly. The other models are
    single-qubit with a monotone parameter-to-GGEP map that is inverted by
    bracketed root finding.
    """
    if model == "depolarizing":
        depolarizing(n, target_eps)  # range check
        return float(target_eps)
    if model not in _MODELS:
        raise ValueError(f"unknown model {model!r}; choose from depolarizing, {', '.join(_MODELS)}")
    build, lo, hi = _MODELS[model]
    f_lo, f_hi = ggep(build(lo)), ggep(build(hi))
    if not f_lo - tol <= target_eps <= f_hi + tol:
        raise ValueError(f"GGEP {target_eps} unreachable by {model} (range [{f_lo}, {f_hi}])")
    if abs(target_eps - f_lo) <= tol:
        return lo
    if abs(target_eps - f_hi) <= tol:
        return hi
    param = brentq(lambda x: ggep(build(x)) - target_eps, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    if abs(ggep(build(param)) - target_eps) > tol:
        raise ArithmeticError(f"calibration of {model} to {target_eps} did not converge")
    return float(param)


def per_qubit_ggep(eps: float, n: int) -> float:
    """Single-qubit GGEP whose ``n``-fold product has GGEP ``eps``."""
    return 1.0 - (1.0 - eps) ** (1.0 / n)


def product_channel(model: str, eps: float, n: int = 1) -> PTMChannel:
    """``n``-fold tensor power of a model channel, with the GGEP split evenly per qubit."""
    e1 = per_qubit_ggep(eps, n)
    param = calibrate_to_ggep(model, e1)
    if model == "depolarizing":
        single = depolarizing(1, param)
    else:
        single = _MODELS[model][0](param)
    return single if n == 1 else tensor([single] * n)


def random_cptp_channel(rng: np.random.Generator, n: int = 1, rank: int | None = None) -> PTMChannel:
    """Random CPTP channel from a Haar-like isometry (Kraus rank ``rank``)."""
    d = 2**n
    rank = rank or d * d
    g = rng.normal(size=(rank * d, d)) + 1j * rng.normal(size=(rank * d, d))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    kraus = [q[k * d:(k + 1) * d] for k in range(rank)]
    return ptm_of_kraus(kraus, name="random")


def random_triangular_channel(rng: np.random.Generator, max_damping: float = 0.3, max_pauli: float = 0.2) -> PTMChannel:
    """Random single-qubit lower-triangular CPTP channel.

    Composition of one to three axis-aligned dampings followed by a random
    Pauli channel; lower-triangular matrices are closed under products.
    """
    m = np.eye(4)
    for _ in range(int(rng.integers(1, 4))):
        d = axis_damping(float(rng.uniform(0, max_damping)), int(rng.integers(1, 4)), int(rng.choice([-1, 1])))
        m = d.m @ m
    errs = rng.dirichlet(np.ones(3)) * rng.uniform(0, max_pauli)
    pauli = eta_to_ptm(np.r_[1 - errs.sum(), errs])
    return PTMChannel(pauli.m @ m, 1, name="random_triangular")
