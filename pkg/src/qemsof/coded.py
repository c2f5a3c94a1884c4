"""Overhead of QEM combined with error-correcting (concatenated) or error-detecting codes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import depolarizing_sof


@dataclass(frozen=True)
class ConcatModel:
    """Logical error map ``f(eps) = eps^2 / threshold`` for a code on ``n_code`` qubits."""

    n_code: int = 7
    threshold: float = 1.5e-3
    order: int = 2

    def __post_init__(self):
        if self.n_code < 2:
            raise ValueError("a code needs at least two physical qubits")
        if not 0 < self.threshold < 1:
            raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.order < 2:
            raise ValueError("suppression order must be at least 2")

    def f(self, eps: float) -> float:
        # fixed point at the threshold: f(th) = th
        return self.threshold * (eps / self.threshold) ** self.order


STEANE = ConcatModel()


def concat_ggep(model: ConcatModel, eps: float, l: int) -> float:
    """``f`` applied ``l`` times to ``eps``."""
    if l < 0:
        raise ValueError("number of stages must be non-negative")
    for _ in range(l):
        eps = model.f(eps)
    return eps


@dataclass(frozen=True)
class CriticalPoint:
    exact: float
    maclaurin: float
    l: int


def critical_point(model: ConcatModel, eps: float, l: int = 0, n_code: int | None = None) -> CriticalPoint:
    """Circuit size above which stage ``l + 1`` beats stage ``l``.

    ``N_l = ln(n) / (ln(1 + 4 f^l) - ln(1 + 4 f^{l+1}))``, with the first-order
    form ``ln(n) / (4 (f^l - f^{l+1}))`` alongside.
    """
    n = n_code or model.n_code
    a = concat_ggep(model, eps, l)
    b = model.f(a)
    gap = math.log1p(4 * a) - math.log1p(4 * b)
    lin_gap = 4 * (a - b)
    if gap <= 0 or lin_gap <= 0:
        raise ValueError(f"stage {l + 1} does not reduce the GGEP at eps={eps}; no critical point")
    return CriticalPoint(math.log(n) / gap, math.log(n) / lin_gap, l)


@dataclass(frozen=True)
class SchemeChoice:
    best: int
    log_overheads: np.ndarray


def best_scheme(eps: float, n_gates: float, max_stages: int = 3, model: ConcatModel = STEANE) -> SchemeChoice:
    """Stage count minimizing ``l ln(n_code) + N ln(1 + 4 f^l(eps))``."""
    if n_gates < 0 or max_stages < 0:
        raise ValueError("gate count and stage count must be non-negative")
    logs = np.array(
        [l * math.log(model.n_code) + n_gates * math.log1p(4 * concat_ggep(model, eps, l)) for l in range(max_stages + 1)]
    )
    return SchemeChoice(int(np.argmin(logs)), logs)


def qedc_sof(p_detect: float) -> float:
    """Post-selection overhead ``p / (1 - p)`` for detection probability ``p``."""
    if not 0.0 <= p_detect < 1.0:
        raise ValueError(f"detection probability must be in [0, 1), got {p_detect}")
    return p_detect / (1.0 - p_detect)


def qedc_total_sof(gamma_qedc: float, gamma_qem: float) -> float:
    if gamma_qedc < 0 or gamma_qem < 0:
        raise ValueError("overhead factors are non-negative")
    return (1 + gamma_qedc) * (1 + gamma_qem) - 1


@dataclass(frozen=True)
class QedcGateSpec:
    """A logical gate of an error-detecting code and the physical gates it costs."""

    name: str
    n_single: int
    n_two: int
    transversal: bool = False
    logical_qubits: int = 2

    def __post_init__(self):
        if self.n_single < 0 or self.n_two < 0:
            raise ValueError("gate counts must be non-negative")

    @property
    def physical_gate_counts(self) -> tuple[int, int]:
        return (self.n_single, self.n_two)


# [[4,2,2]] catalog
CNOT_TRANSVERSAL = QedcGateSpec("cnot_transversal", 0, 4, transversal=True)
CZ = QedcGateSpec("cz", 6, 0)
SWAP_H = QedcGateSpec("swap_h", 4, 0)
GATE_CATALOG = {g.name: g for g in (CNOT_TRANSVERSAL, CZ, SWAP_H)}


@dataclass(frozen=True)
class QedcAnalysis:
    p_detect: float
    residual_ggep: float
    gamma_qedc: float
    gamma_qem_post: float
    gamma_total: float
    gamma_pure_qem: float


def qedc_gate_analysis(
    spec: QedcGateSpec,
    eps1: float | None = None,
    eps2: float = 0.01,
    residual_coeff: float = 0.5,
    p_measure: float = 0.0,
    pure_ggep: float | None = None,
) -> QedcAnalysis:
    """First-order detection model with an ``O(p^2)`` undetected residual.

    ``p = n1 eps1 + n2 eps2 (+ p_measure)``; the post-selected logical gate is
    left with a depolarizing error of GGEP ``residual_coeff * p^2``. The pure
    QEM reference mitigates the unencoded logical gate, taken as depolarizing
    with GGEP ``pure_ggep`` (default ``eps2``, one physical two-qubit gate).
    """
    if eps1 is None:
        eps1 = eps2 / 10
    if min(eps1, eps2, p_measure, residual_coeff) < 0:
        raise ValueError("error rates and coefficients must be non-negative")
    p = spec.n_single * eps1 + spec.n_two * eps2 + p_measure
    g_d = qedc_sof(p)
    residual = residual_coeff * p**2
    g_m = depolarizing_sof(spec.logical_qubits, residual)
    pure = depolarizing_sof(spec.logical_qubits, eps2 if pure_ggep is None else pure_ggep)
    return QedcAnalysis(p, residual, g_d, g_m, qedc_total_sof(g_d, g_m), pure)


__all__ = [
    "ConcatModel",
    "STEANE",
    "CriticalPoint",
    "SchemeChoice",
    "QedcGateSpec",
    "QedcAnalysis",
    "CNOT_TRANSVERSAL",
    "CZ",
    "SWAP_H",
    "GATE_CATALOG",
    "concat_ggep",
    "critical_point",
    "best_scheme",
    "qedc_sof",
    "qedc_total_sof",
    "qedc_gate_analysis",
]
