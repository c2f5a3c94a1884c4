"""Channel precoders: Pauli twirl, Clifford twirl, gate-referred twirl, imperfect twirl."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .channels import PauliChannelEta, depolarizing, eta_to_ptm, ggep, is_cptp, tensor
from .errors import InvalidChannelError, SingularChannel
from .pauli import PTMChannel, pauli_matrices, ptm_of_unitary

TwirlKind = Literal["pauli", "clifford"]


def pauli_twirl(c: PTMChannel) -> PTMChannel:
    """Keep the PTM diagonal; the result is the Pauli channel with the same GGEP."""
    out = PTMChannel(np.diag(np.diag(c.m)), c.n, name=f"T_P({c.name})" if c.name else "")
    report = is_cptp(out)
    if not report:
        raise InvalidChannelError(
            f"Pauli twirl is not CPTP (min Choi eigenvalue {report.min_choi_eigenvalue:.3e}); input is not a channel"
        )
    return out


def pauli_twirl_average(c: PTMChannel) -> PTMChannel:
    """Explicit average ``4^-n sum_i S_i C S_i`` over Pauli conjugations (n <= 2)."""
    if c.n > 2:
        raise ValueError("explicit Pauli average is limited to n <= 2")
    acc = np.zeros_like(c.m)
    for s in pauli_matrices(c.n):
        p = ptm_of_unitary(s).m
        acc += p @ c.m @ p
    return PTMChannel(acc / 4**c.n, c.n)


def pauli_twirl_montecarlo(c: PTMChannel, exact_check: bool = True, atol: float = 1e-12) -> PTMChannel:
    """Explicit Pauli average, optionally asserted against :func:`pauli_twirl`."""
    avg = pauli_twirl_average(c)
    if exact_check and not avg.allclose(pauli_twirl(c), atol=atol):
        raise ArithmeticError("explicit Pauli average disagrees with the diagonal projection")
    return avg


@lru_cache(maxsize=None)
def single_qubit_cliffords() -> tuple[np.ndarray, ...]:
    """PTMs of the 24 single-qubit Clifford gates, generated from H and S."""
    h = ptm_of_unitary(np.array([[1, 1], [1, -1]]) / math.sqrt(2)).m
    s = ptm_of_unitary(np.diag([1, 1j])).m
    found = {_key(np.eye(4)): np.eye(4)}
    frontier = [np.eye(4)]
    while frontier:
        nxt = []
        for g in frontier:
            for gen in (h, s):
                m = gen @ g
                k = _key(m)
                if k not in found:
                    found[k] = m
                    nxt.append(m)
        frontier = nxt
    out = tuple(found[k] for k in sorted(found))
    for m in out:
        m.setflags(write=False)
    return out


def _key(m: np.ndarray) -> tuple:
    return tuple(np.rint(m).astype(int).ravel())


def clifford_twirl(c: PTMChannel) -> PTMChannel:
    """Depolarizing channel with the input's GGEP (and hence its average fidelity).

    Built from ``eta`` directly because a general channel may have GGEP above
    ``1 - 4^-n``, outside the range of :func:`depolarizing`.
    """
    eps = ggep(c)
    if eps <= 1 - 4.0**-c.n:
        return depolarizing(c.n, max(eps, 0.0))
    dim = 4**c.n
    eta = np.full(dim, eps / (dim - 1))
    eta[0] = 1 - eps
    return eta_to_ptm(PauliChannelEta(eta, c.n))


def clifford_twirl_average(c: PTMChannel) -> PTMChannel:
    """Explicit average over the 24 single-qubit Cliffords; validation path for n = 1."""
    if c.n != 1:
        raise ValueError("explicit Clifford enumeration is implemented for one qubit only")
    cliffs = single_qubit_cliffords()
    acc = sum(g.T @ c.m @ g for g in cliffs)
    return PTMChannel(acc / len(cliffs), 1)


def gate_referred_twirl(gate: PTMChannel, noisy_gate: PTMChannel) -> PTMChannel:
    """Twirl the error ``C = noisy * gate^-1`` and re-attach the perfect gate."""
    cond = np.linalg.cond(gate.m)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularChannel("reference gate is not invertible")
    err = PTMChannel(noisy_gate.m @ np.linalg.inv(gate.m), gate.n)
    return pauli_twirl(err) @ gate


@dataclass(frozen=True)
class TwirlConfig:
    """Twirl kind plus the GGEP of each (single-qubit) twirl gate; two layers are applied."""

    kind: TwirlKind = "pauli"
    gate_noise_ggep: float = 0.0

    def __post_init__(self):
        if self.kind not in ("pauli", "clifford"):
            raise ValueError(f"unknown twirl kind {self.kind!r}")
        if not 0.0 <= self.gate_noise_ggep <= 0.75:
            raise ValueError(f"twirl gate GGEP must lie in [0, 0.75], got {self.gate_noise_ggep}")

    @property
    def layers(self) -> int:
        return 2


def twirl(c: PTMChannel, kind: TwirlKind = "pauli") -> PTMChannel:
    return pauli_twirl(c) if kind == "pauli" else clifford_twirl(c)


def imperfect_twirl(c: PTMChannel, cfg: TwirlConfig) -> PTMChannel:
    """Ideal twirl sandwiched by per-qubit depolarizing layers of GGEP ``cfg.gate_noise_ggep``."""
    ideal = twirl(c, cfg.kind)
    if cfg.gate_noise_ggep == 0:
        return ideal
    layer = tensor([depolarizing(1, cfg.gate_noise_ggep)] * c.n)
    return layer @ ideal @ layer


__all__ = [
    "TwirlConfig",
    "pauli_twirl",
    "pauli_twirl_average",
    "pauli_twirl_montecarlo",
    "single_qubit_cliffords",
    "clifford_twirl",
    "clifford_twirl_average",
    "gate_referred_twirl",
    "twirl",
    "imperfect_twirl",
]
