"""Closed-form SOF bounds, the depolarizing closed form, hashing bound and proliferation ratios."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import entropy

from .channels import PauliChannelEta, _as_eta

DS_TOL = 1e-10


def _check_eps(eps: float, upper: float, inclusive: bool = False) -> float:
    eps = float(eps)
    ok = 0.0 <= eps <= upper if inclusive else 0.0 <= eps < upper
    if not ok:
        raise ValueError(f"GGEP {eps} outside the valid range [0, {upper}{']' if inclusive else ')'}")
    return eps


def sof_lower_bound(eps: float) -> float:
    """``4 eps / (1 - eps)^2``; the depolarizing SOF in the many-qubit limit."""
    eps = _check_eps(eps, 1.0)
    return 4 * eps / (1 - eps) ** 2


def sof_upper_bound(eps: float) -> float:
    """``4 eps (1 - eps) / (1 - 2 eps)^2``, attained by single-error Pauli channels."""
    eps = _check_eps(eps, 0.5)
    return 4 * eps * (1 - eps) / (1 - 2 * eps) ** 2


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float
    eps: float

    def contains(self, gamma: float, slack: float = 1e-10) -> bool:
        return self.lower - slack <= gamma <= self.upper + slack


def bound_pair(eps: float) -> BoundPair:
    return BoundPair(sof_lower_bound(eps), sof_upper_bound(eps), float(eps))


def depolarizing_sof(n: int, eps: float) -> float:
    r"""Closed-form SOF of the ``n``-qubit depolarizing channel.

    With ``d = 1 - 4^n eps / (4^n - 1)`` the reduced quasi-probability has
    ``mu_I = (1 + (4^n - 1)/d) / 4^n`` and ``4^n - 1`` entries ``(1 - 1/d)/4^n``,
    which sum in absolute value to
    ``(4^n (1 + eps) - 1 - 2 eps) / (4^n (1 - eps) - 1)``.
    """
    q = 4**n
    eps = _check_eps(eps, 1 - 1 / q)
    norm = (q * (1 + eps) - 1 - 2 * eps) / (q * (1 - eps) - 1)
    return norm**2 - 1


def depolarizing_sof_printed(n: int, eps: float) -> float:
    """The alternative closed form ``(((4^n-1)(1-2eps) - eps) / (4^n(1-eps) - 1))^2 - 1``.

    Kept for comparison only: it disagrees with the brute-force value (it is
    negative at n = 1, eps = 0.03).
    """
    q = 4**n
    eps = _check_eps(eps, 1 - 1 / q)
    return (((q - 1) * (1 - 2 * eps) - eps) / (q * (1 - eps) - 1)) ** 2 - 1


def hashing_bound(eta) -> float:
    """``1 - H(eta)`` with the Shannon entropy in bits."""
    e = _as_eta(eta)
    return float(1.0 - entropy(np.clip(e.eta, 0.0, None), base=2))


def validate_doubly_stochastic(q: np.ndarray, atol: float = DS_TOL) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"mixing matrix must be square, got {q.shape}")
    if np.any(q < -atol):
        raise ValueError("mixing matrix has negative entries")
    if not (np.allclose(q.sum(axis=0), 1, atol=atol) and np.allclose(q.sum(axis=1), 1, atol=atol)):
        raise ValueError("mixing matrix is not doubly stochastic")
    if abs(q[0, 0] - 1) > atol:
        raise ValueError("mixing matrix must fix the identity component to preserve the GGEP")
    return q


def doubly_stochastic_mix(eta, q: np.ndarray) -> PauliChannelEta:
    """``eta' = q eta`` for a doubly stochastic ``q`` that leaves ``eta_I`` alone."""
    e = _as_eta(eta)
    q = validate_doubly_stochastic(q)
    if q.shape[0] != e.eta.size:
        raise ValueError(f"mixing matrix size {q.shape[0]} does not match {e.eta.size} Pauli errors")
    mixed = q @ e.eta
    return PauliChannelEta(mixed / mixed.sum(), e.n)


def random_doubly_stochastic(rng: np.random.Generator, size: int, terms: int = 4) -> np.ndarray:
    """Random convex combination of permutations of the non-identity Paulis."""
    weights = rng.dirichlet(np.ones(terms))
    q = np.zeros((size, size))
    for w in weights:
        perm = np.concatenate([[0], 1 + rng.permutation(size - 1)])
        q[np.arange(size), perm] += w
    return q


@dataclass(frozen=True)
class ProliferationRatios:
    generic: float
    depolarizing: float


def proliferation_ratio_bounds(eps: float) -> ProliferationRatios:
    """Best-case SOF reduction ratios when coding operates above threshold."""
    eps = _check_eps(eps, 0.5)
    generic = (1 - 2 * eps) ** 2 / (1 - eps) ** 3
    depol = (3 - 4 * eps) ** 2 / (3 * (1 - eps) ** 2 * (3 - eps))
    return ProliferationRatios(generic, depol)


def random_pauli_eta(rng: np.random.Generator, eps: float, n: int = 1) -> PauliChannelEta:
    """Pauli channel with GGEP ``eps``; non-identity mass is Dirichlet-uniform."""
    q = 4**n
    eta = np.empty(q)
    eta[0] = 1 - eps
    eta[1:] = eps * rng.dirichlet(np.ones(q - 1))
    return PauliChannelEta(eta, n)


__all__ = [
    "BoundPair",
    "ProliferationRatios",
    "sof_lower_bound",
    "sof_upper_bound",
    "bound_pair",
    "depolarizing_sof",
    "depolarizing_sof_printed",
    "hashing_bound",
    "validate_doubly_stochastic",
    "doubly_stochastic_mix",
    "random_doubly_stochastic",
    "proliferation_ratio_bounds",
    "random_pauli_eta",
]
