"""JSON descriptors for channels and circuits.

Channel forms::

    {"kind": "depolarizing", "n": 1, "params": {"eps": 0.03}}
    {"kind": "ptm", "n": 1, "matrix": [[...], ...]}          # row-major reals
    {"kind": "kraus", "n": 1, "matrices": [[[[re, im], ...], ...], ...]}
    {"kind": "tensor", "factors": [<channel>, ...]}

Circuit form::

    {"n": 1,
     "elements": [{"type": "gate", "channel": <channel>, "targets": [0]},
                  {"type": "channel", "channel": <channel>},
                  {"type": "qem", "label": "g1", "targets": [0]}],
     "observable": [{"weight": 1.0, "pauli": "Z"}],
     "plans": {"g1": {"invert": <channel>}}}
"""

from __future__ import annotations

import inspect
import json
import math
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import channels as ch
from .errors import PlanMismatch
from .pauli import PTMChannel, identity_channel, ptm_of_kraus, ptm_of_unitary
from .qem import plan_for_channel
from .simulate import Circuit, Element, Observable


class DescriptorError(ValueError):
    """Malformed channel or circuit description."""


def _rot(axis: int) -> Callable[[float], PTMChannel]:
    from .pauli import SINGLE_QUBIT_PAULIS

    p = SINGLE_QUBIT_PAULIS[axis]

    def make(theta: float) -> PTMChannel:
        u = math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * p
        return ptm_of_unitary(u, name=f"r{'xyz'[axis - 1]}")

    return make


def _fixed(u, name: str) -> Callable[[], PTMChannel]:
    u = np.asarray(u, dtype=complex)
    return lambda: ptm_of_unitary(u, name=name)


_S2 = 1 / math.sqrt(2)

CHANNEL_KINDS: dict[str, Callable[..., PTMChannel]] = {
    "identity": identity_channel,
    "depolarizing": ch.depolarizing,
    "bit_flip": ch.bit_flip,
    "phase_flip": ch.phase_flip,
    "amplitude_damping": ch.amplitude_damping,
    "over_rotation": ch.over_rotation,
    "pauli": ch.pauli_channel,
    "x": _fixed([[0, 1], [1, 0]], "x"),
    "y": _fixed([[0, -1j], [1j, 0]], "y"),
    "z": _fixed([[1, 0], [0, -1]], "z"),
    "h": _fixed([[_S2, _S2], [_S2, -_S2]], "h"),
    "s": _fixed([[1, 0], [0, 1j]], "s"),
    "rx": _rot(1),
    "ry": _rot(2),
    "rz": _rot(3),
    "cnot": _fixed([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], "cnot"),
    "cz": _fixed(np.diag([1, 1, 1, -1]), "cz"),
}


def kind_parameters(kind: str) -> list[str]:
    try:
        fn = CHANNEL_KINDS[kind]
    except KeyError:
        raise DescriptorError(f"unknown channel kind {kind!r}; known: {', '.join(sorted(CHANNEL_KINDS))}") from None
    return list(inspect.signature(fn).parameters)


def channel_from_args(kind: str, args: list[str]) -> PTMChannel:
    """Positional CLI form: ``depolarizing 1 0.03`` maps onto ``(n, eps)``."""
    names = kind_parameters(kind)
    if kind == "pauli":
        try:
            return ch.pauli_channel([float(a) for a in args])
        except ValueError as exc:
            raise DescriptorError(str(exc)) from exc
    if len(args) > len(names):
        raise DescriptorError(f"{kind} takes at most {len(names)} parameter(s) ({', '.join(names)}), got {len(args)}")
    params: dict[str, Any] = {}
    for name, raw in zip(names, args):
        try:
            params[name] = int(raw) if name == "n" else float(raw)
        except ValueError:
            raise DescriptorError(f"parameter {name}={raw!r} is not a number") from None
    return _build(kind, params)


def _build(kind: str, params: dict[str, Any]) -> PTMChannel:
    names = kind_parameters(kind)
    unknown = set(params) - set(names)
    if unknown:
        raise DescriptorError(f"{kind} does not accept {sorted(unknown)}; expected {names}")
    try:
        return CHANNEL_KINDS[kind](**params)
    except TypeError as exc:
        raise DescriptorError(f"{kind}: {exc}") from exc


def _complex_matrix(rows) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DescriptorError(f"Kraus matrix entries must be [re, im] pairs: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DescriptorError("Kraus matrix entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def parse_channel(obj: dict) -> PTMChannel:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise DescriptorError("channel descriptor must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "ptm":
        try:
            c = PTMChannel.from_matrix(np.asarray(obj["matrix"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise DescriptorError(f"bad ptm descriptor: {exc}") from exc
    elif kind == "kraus":
        if "matrices" not in obj:
            raise DescriptorError("kraus descriptor needs 'matrices'")
        c = ptm_of_kraus([_complex_matrix(m) for m in obj["matrices"]])
    elif kind == "tensor":
        factors = obj.get("factors")
        if not factors:
            raise DescriptorError("tensor descriptor needs a non-empty 'factors' list")
        c = ch.tensor([parse_channel(f) for f in factors])
    else:
        params = obj.get("params", {})
        if not isinstance(params, dict):
            raise DescriptorError("'params' must be an object")
        params = dict(params)
        if "n" in obj and "n" in kind_parameters(kind):
            params.setdefault("n", int(obj["n"]))
        c = _build(kind, params)
    if "n" in obj and int(obj["n"]) != c.n:
        raise DescriptorError(f"descriptor declares n={obj['n']} but the channel acts on {c.n} qubit(s)")
    return c


def channel_to_descriptor(c: PTMChannel) -> dict:
    return {"kind": "ptm", "n": c.n, "matrix": c.m.tolist()}


def load_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"{path}: invalid JSON ({exc})") from exc


def parse_circuit(obj: dict):
    """Circuit, plans and observable from a circuit descriptor."""
    if not isinstance(obj, dict) or "elements" not in obj:
        raise DescriptorError("circuit descriptor needs 'elements'")
    n = int(obj.get("n", 1))
    elements = []
    for k, el in enumerate(obj["elements"]):
        typ = el.get("type")
        if typ == "qem":
            targets = tuple(el.get("targets", range(n)))
            elements.append(Element("qem", targets, label=str(el.get("label", f"q{k}"))))
        elif typ in ("gate", "channel"):
            c = parse_channel(el.get("channel", {}))
            targets = tuple(el.get("targets", range(c.n)))
            elements.append(Element(typ, targets, c))
        else:
            raise DescriptorError(f"element {k}: unknown type {typ!r}")
    circuit = Circuit(n, tuple(elements))
    terms = obj.get("observable", [{"weight": 1.0, "pauli": "Z" * n}])
    try:
        observable = Observable(tuple((t.get("weight", 1.0), t["pauli"]) for t in terms))
    except (KeyError, AttributeError) as exc:
        raise DescriptorError(f"bad observable: {exc}") from exc
    plans = {}
    for label, spec in obj.get("plans", {}).items():
        if "invert" not in spec:
            raise DescriptorError(f"plan {label!r} needs an 'invert' channel")
        target = parse_channel(spec["invert"])
        plans[label] = plan_for_channel(target)
    slot_width = {el.label: len(el.targets) for el in elements if el.kind == "qem"}
    for label, plan in plans.items():
        if label in slot_width and plan.n != slot_width[label]:
            raise PlanMismatch(f"plan {label!r} acts on {plan.n} qubit(s), slot on {slot_width[label]}")
    return circuit, plans, observable
