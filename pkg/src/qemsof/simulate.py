"""PTM-vector circuit simulation and Monte-Carlo execution of QEM sampling plans.

Shots are processed in fixed-size blocks; block ``b`` draws from its own
Philox stream keyed by ``(seed, b)``, so results do not depend on how blocks are
scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .channels import depolarizing
from .errors import DimensionError, PlanMismatch
from .pauli import DensityVector, PauliString, PTMChannel, ptm_of_unitary, zero_state
from .qem import SamplingPlan, plan_for_channel

BLOCK_SHOTS = 4096
PLAN_PROB_TOL = 1e-12


def embed_ptm(m: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Lift a PTM acting on ``targets`` to an ``n``-qubit PTM (identity elsewhere)."""
    k = len(targets)
    if m.shape != (4**k, 4**k):
        raise DimensionError(f"{k}-qubit element has PTM shape {m.shape}")
    if len(set(targets)) != k or any(not 0 <= t < n for t in targets):
        raise DimensionError(f"invalid targets {tuple(targets)} for {n} qubits")
    if k == n and list(targets) == list(range(n)):
        return np.asarray(m, dtype=float)
    idx = np.arange(4**n)
    digits = np.stack([(idx >> (2 * (n - 1 - q))) & 3 for q in range(n)])
    sub = np.zeros_like(idx)
    for t in targets:
        sub = 4 * sub + digits[t]
    rest = [q for q in range(n) if q not in targets]
    same_rest = np.ones((idx.size, idx.size), dtype=bool)
    for q in rest:
        same_rest &= digits[q][:, None] == digits[q][None, :]
    return np.where(same_rest, m[sub[:, None], sub[None, :]], 0.0)


@dataclass(frozen=True, eq=False)
class Element:
    """One circuit step: a gate or noise channel (``ptm`` set), or a QEM slot (``label`` set)."""

    kind: str
    targets: tuple[int, ...]
    ptm: PTMChannel | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("gate", "channel", "qem"):
            raise ValueError(f"unknown element kind {self.kind!r}")
        if self.kind == "qem" and not self.label:
            raise ValueError("a QEM slot needs a label")
        if self.kind != "qem" and self.ptm is None:
            raise ValueError(f"{self.kind} element needs a PTM")
        if self.ptm is not None and self.ptm.n != len(self.targets):
            raise DimensionError(f"{self.ptm.n}-qubit PTM on targets {self.targets}")


@dataclass(frozen=True, eq=False)
class Circuit:
    n: int
    elements: tuple[Element, ...] = ()
    initial: DensityVector | None = None

    def __post_init__(self):
        if not 1 <= self.n <= 4:
            raise DimensionError(f"circuits are limited to 1..4 qubits, got {self.n}")
        init = self.initial or zero_state(self.n)
        if init.n != self.n:
            raise DimensionError("initial state size does not match the circuit")
        object.__setattr__(self, "initial", init)
        object.__setattr__(self, "elements", tuple(self.elements))
        for el in self.elements:
            if any(not 0 <= t < self.n for t in el.targets):
                raise DimensionError(f"element targets {el.targets} outside {self.n} qubits")

    @property
    def qem_labels(self) -> list[str]:
        return [el.label for el in self.elements if el.kind == "qem"]

    def ideal(self) -> Circuit:
        """Same circuit with every noise channel and QEM slot removed."""
        return Circuit(self.n, tuple(el for el in self.elements if el.kind == "gate"), self.initial)

    def _full(self, el: Element, m: np.ndarray | None = None) -> np.ndarray:
        return embed_ptm(el.ptm.m if m is None else m, el.targets, self.n)


@dataclass(frozen=True)
class Observable:
    """``sum_i h_i P_i`` with real weights."""

    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        terms = tuple((float(h), p if isinstance(p, PauliString) else PauliString(p)) for h, p in self.terms)
        if not terms:
            raise ValueError("an observable needs at least one term")
        if len({p.n for _, p in terms}) != 1:
            raise DimensionError("observable terms act on different qubit counts")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def pauli(cls, letters: str, weight: float = 1.0) -> Observable:
        return cls(((weight, PauliString(letters)),))

    @property
    def n(self) -> int:
        return self.terms[0][1].n


def _check_obs(circuit: Circuit, obs: Observable) -> None:
    if obs.n != circuit.n:
        raise DimensionError(f"{obs.n}-qubit observable on a {circuit.n}-qubit circuit")


def _check_plans(circuit: Circuit, plans: Mapping[str, SamplingPlan]) -> None:
    labels = circuit.qem_labels
    missing = [l for l in labels if l not in plans]
    extra = [l for l in plans if l not in labels]
    if missing or extra:
        raise PlanMismatch(f"QEM slots without plans: {missing}; plans without slots: {extra}")
    for el in circuit.elements:
        if el.kind != "qem":
            continue
        plan = plans[el.label]
        if plan.n != len(el.targets):
            raise PlanMismatch(f"plan {el.label!r} is {plan.n}-qubit but the slot has {len(el.targets)} target(s)")
        if abs(float(np.sum(plan.probs)) - 1.0) > PLAN_PROB_TOL or np.any(plan.probs < 0):
            raise PlanMismatch(f"plan {el.label!r} probabilities do not form a distribution")


def propagate(circuit: Circuit, plans: Mapping[str, SamplingPlan] | None = None, choice: Sequence[int] | None = None) -> np.ndarray:
    """Final PTM state vector.

    QEM slots apply the plan's full inverse, or the candidate picked by
    ``choice`` (one index per slot), or nothing when ``plans`` is ``None``.
    """
    x = np.array(circuit.initial.x)
    slot = 0
    for el in circuit.elements:
        if el.kind == "qem":
            if plans is not None:
                plan = plans[el.label]
                m = plan.reconstruct() if choice is None else plan.ptms[choice[slot]]
                x = circuit._full(el, m) @ x
            slot += 1
        else:
            x = circuit._full(el) @ x
    return x


def _term_expectations(x: np.ndarray, n: int, obs: Observable) -> np.ndarray:
    scale = math.sqrt(2**n)
    return np.array([scale * x[p.index] for _, p in obs.terms])


def run_exact(circuit: Circuit, observable: Observable, plans: Mapping[str, SamplingPlan] | None = None) -> float:
    """``sqrt(2^n) sum_i h_i x[idx(P_i)]`` after propagating the state."""
    _check_obs(circuit, observable)
    if plans is not None:
        _check_plans(circuit, plans)
    x = propagate(circuit, plans)
    e = _term_expectations(x, circuit.n, observable)
    return float(sum(h * ei for (h, _), ei in zip(observable.terms, e)))


def observable_variance(circuit: Circuit, observable: Observable) -> float:
    """``sum_i (h_i^2 - <h_i P_i>^2)``: per-term single-shot variance, terms measured separately."""
    _check_obs(circuit, observable)
    e = _term_expectations(propagate(circuit), circuit.n, observable)
    return float(sum(h * h - (h * ei) ** 2 for (h, _), ei in zip(observable.terms, e)))


@dataclass(frozen=True)
class EstimationReport:
    mean: float
    std_error: float
    shots: int
    variance: float
    weight_norm: float
    rng_seed: int
    mean_abs_weight: float = field(default=1.0)

    def within(self, value: float, sigmas: float = 3.0) -> bool:
        return abs(self.mean - value) <= sigmas * self.std_error


def _block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def run_qem_monte_carlo(
    circuit: Circuit,
    plans: Mapping[str, SamplingPlan],
    observable: Observable,
    shots: int,
    seed: int = 0,
) -> EstimationReport:
    """Sample one candidate per QEM slot per shot and one outcome per observable term.

    The per-shot estimate is ``(prod_k w_k) * sum_i h_i o_i`` with ``o_i`` in
    ``{+1, -1, 0}``; 0 is the rejected branch of a trace-decreasing candidate.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    _check_obs(circuit, observable)
    _check_plans(circuit, plans)
    slots = [plans[l] for l in circuit.qem_labels]
    h = np.array([w for w, _ in observable.terms])
    cache: dict[tuple[int, ...], tuple[float, np.ndarray, np.ndarray]] = {}

    def outcome_params(combo: tuple[int, ...]):
        if combo not in cache:
            x = propagate(circuit, plans, combo)
            tr = math.sqrt(2**circuit.n) * x[0]
            e = _term_expectations(x, circuit.n, observable)
            weight = float(np.prod([p.weights[c] for p, c in zip(slots, combo)]))
            cache[combo] = (weight, np.full(e.size, tr), e)
        return cache[combo]

    values = np.empty(shots)
    abs_w = np.empty(shots)
    for block, start in enumerate(range(0, shots, BLOCK_SHOTS)):
        size = min(BLOCK_SHOTS, shots - start)
        rng = _block_rng(seed, block)
        if slots:
            picks = np.stack([rng.choice(len(p.probs), size=size, p=p.probs) for p in slots], axis=1)
        else:
            picks = np.zeros((size, 0), dtype=int)
        u = rng.random((size, h.size))
        combos, inverse = np.unique(picks, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        weights = np.empty(len(combos))
        tr = np.empty((len(combos), h.size))
        ex = np.empty((len(combos), h.size))
        for k, combo in enumerate(combos):
            weights[k], tr[k], ex[k] = outcome_params(tuple(int(c) for c in combo))
        t_s, e_s = tr[inverse], ex[inverse]
        outcome = np.where(u < (t_s + e_s) / 2, 1.0, np.where(u < t_s, -1.0, 0.0))
        w_s = weights[inverse]
        values[start : start + size] = w_s * (outcome @ h)
        abs_w[start : start + size] = np.abs(w_s)
    var = float(values.var(ddof=1)) if shots > 1 else 0.0
    norm = float(np.prod([p.one_norm for p in slots])) if slots else 1.0
    return EstimationReport(
        mean=float(values.mean()),
        std_error=math.sqrt(var / shots),
        shots=shots,
        variance=var,
        weight_norm=norm,
        rng_seed=seed,
        mean_abs_weight=float(abs_w.mean()),
    )


def run_monte_carlo(circuit: Circuit, observable: Observable, shots: int, seed: int = 0) -> EstimationReport:
    """Plain sampling of a circuit without QEM slots (slots, if any, are skipped)."""
    bare = Circuit(circuit.n, tuple(el for el in circuit.elements if el.kind != "qem"), circuit.initial)
    return run_qem_monte_carlo(bare, {}, observable, shots, seed)


def empirical_sof(report_qem: EstimationReport, report_plain: EstimationReport) -> float:
    """Variance ratio minus one."""
    if report_plain.variance <= 0:
        return 0.0 if report_qem.variance <= 0 else math.inf
    return report_qem.variance / report_plain.variance - 1.0


# Built-in circuits -------------------------------------------------------

SINGLE_GATE_EXPECTATION = 0.25
SINGLE_GATE_EPS = 0.03


def ry(theta: float) -> PTMChannel:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return ptm_of_unitary(np.array([[c, -s], [s, c]], dtype=complex), name="ry")


def noisy_rotation_circuit(
    gates: int = 1, eps: float = SINGLE_GATE_EPS, expectation: float = SINGLE_GATE_EXPECTATION
) -> tuple[Circuit, dict[str, SamplingPlan], Observable]:
    """``|0>`` through ``gates`` noisy Y-rotations, each followed by a QEM slot; observable Z.

    The rotation angles split ``arccos(expectation)`` evenly, so the noiseless
    ``<Z>`` equals ``expectation``. With ``eps = 0`` no noise and no slots are added.
    """
    theta = math.acos(expectation) / gates
    noise = depolarizing(1, eps)
    elements: list[Element] = []
    plans: dict[str, SamplingPlan] = {}
    for g in range(gates):
        elements.append(Element("gate", (0,), ry(theta)))
        if eps > 0:
            label = f"g{g + 1}"
            elements.append(Element("channel", (0,), noise))
            elements.append(Element("qem", (0,), label=label))
            plans[label] = plan_for_channel(noise)
    return Circuit(1, tuple(elements)), plans, Observable.pauli("Z")


BUILTIN_CIRCUITS = {
    "single-gate": lambda: noisy_rotation_circuit(1),
    "two-gate": lambda: noisy_rotation_circuit(2),
    "zero-noise": lambda: noisy_rotation_circuit(1, eps=0.0),
}


@dataclass(frozen=True)
class SimulationSummary:
    exact: float
    qem: EstimationReport
    plain: EstimationReport
    predicted_ratio: float

    @property
    def variance_ratio(self) -> float:
        return self.qem.variance / self.plain.variance if self.plain.variance > 0 else 1.0

    @property
    def gamma_empirical(self) -> float:
        return empirical_sof(self.qem, self.plain)


def simulate(circuit: Circuit, plans: Mapping[str, SamplingPlan], observable: Observable, shots: int, seed: int = 0) -> SimulationSummary:
    """QEM run against a plain run of the noiseless circuit with the same seed."""
    qem = run_qem_monte_carlo(circuit, plans, observable, shots, seed)
    plain = run_monte_carlo(circuit.ideal(), observable, shots, seed)
    exact = run_exact(circuit.ideal(), observable)
    norm2 = qem.weight_norm**2
    return SimulationSummary(exact, qem, plain, norm2)


__all__ = [
    "BLOCK_SHOTS",
    "Element",
    "Circuit",
    "Observable",
    "EstimationReport",
    "SimulationSummary",
    "embed_ptm",
    "propagate",
    "run_exact",
    "observable_variance",
    "run_qem_monte_carlo",
    "run_monte_carlo",
    "empirical_sof",
    "ry",
    "noisy_rotation_circuit",
    "BUILTIN_CIRCUITS",
    "simulate",
]
