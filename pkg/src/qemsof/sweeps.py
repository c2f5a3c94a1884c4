"""Sweep definitions that emit ``(sweep_id, x_name, x_value, series, value, seed)`` rows."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from . import __version__
from .bounds import random_pauli_eta, sof_lower_bound, sof_upper_bound
from .channels import calibrate_to_ggep, depolarizing, product_channel, _MODELS
from .coded import STEANE, ConcatModel, GATE_CATALOG, best_scheme, critical_point, qedc_gate_analysis
from .qem import channel_sof, pauli_diagonal_sof_batch, quasi_probability
from .twirling import TwirlConfig, clifford_twirl, imperfect_twirl, pauli_twirl

SWEEP_IDS = ("fig9a", "fig9b", "fig10", "fig12", "fig13", "fig14", "pauli-scatter")
COLUMNS = ("sweep_id", "x_name", "x_value", "series", "value", "seed")

_DEFAULT_GRIDS = {
    "fig9a": ("log", 1e-4, 0.1, 20),
    "fig9b": ("log", 1e-4, 0.1, 20),
    "fig10": ("log", 1e-4, 0.1, 20),
    "fig12": ("log", 1e-6, 3e-3, 20),
    "fig13": ("log", 1e-3, 3e-2, 20),
    "fig14": ("log", 1e-3, 3e-2, 20),
    "pauli-scatter": ("log", 1e-4, 0.1, 20),
}


@dataclass(frozen=True)
class Grid:
    scale: str = "log"
    min: float = 1e-4
    max: float = 0.1
    points: int = 20

    def __post_init__(self):
        if self.scale not in ("log", "linear"):
            raise ValueError(f"grid scale must be 'log' or 'linear', got {self.scale!r}")
        if self.points < 2:
            raise ValueError("a grid needs at least two points")
        if self.scale == "log" and self.min <= 0:
            raise ValueError("log grids need a positive minimum")
        if self.max <= self.min:
            raise ValueError("grid max must exceed grid min")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class SweepConfig:
    sweep_id: str
    grid: Grid
    seed: int = 0
    count: int = 1000
    gate_noise_ratio: float = 0.1
    gates: tuple[float, ...] = (1e2, 1e3, 1e4, 1e5, 1e6, 1e7)
    max_stages: int = 3
    threshold: float = 1.5e-3
    n_code: int = 7
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sweep_id not in SWEEP_IDS:
            raise ValueError(f"unknown sweep {self.sweep_id!r}; choose from {', '.join(SWEEP_IDS)}")
        if self.count < 1:
            raise ValueError("count must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> SweepConfig:
        d = dict(d)
        sid = d.pop("sweep_id", d.pop("sweep", None))
        if sid is None:
            raise ValueError("sweep config needs 'sweep_id'")
        scale, lo, hi, pts = _DEFAULT_GRIDS.get(sid, ("log", 1e-4, 0.1, 20))
        g = d.pop("grid", {})
        grid = Grid(g.get("scale", scale), float(g.get("min", lo)), float(g.get("max", hi)), int(g.get("points", pts)))
        if "gates" in d:
            d["gates"] = tuple(float(x) for x in d["gates"])
        known = {f for f in cls.__dataclass_fields__} - {"sweep_id", "grid", "extra"}
        extra = {k: d.pop(k) for k in list(d) if k not in known}
        return cls(sid, grid, extra=extra, **d)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["gates"] = list(self.gates)
        return out

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


Row = tuple[str, str, float, str, float, int]


def _sof_or_nan(fn) -> float:
    try:
        return fn()
    except ArithmeticError:
        return math.nan


def _fig9(cfg: SweepConfig, n: int) -> Iterator[Row]:
    for eps in cfg.grid.values():
        eps = float(eps)
        yield (cfg.sweep_id, "ggep", eps, "lower_bound", sof_lower_bound(eps), cfg.seed)
        if eps < 0.5:
            yield (cfg.sweep_id, "ggep", eps, "upper_bound", sof_upper_bound(eps), cfg.seed)
        for model in ("depolarizing", "amplitude_damping", "over_rotation"):
            yield (cfg.sweep_id, "ggep", eps, model, _sof_or_nan(lambda: channel_sof(product_channel(model, eps, n))), cfg.seed)


def _fig10(cfg: SweepConfig) -> Iterator[Row]:
    for eps in cfg.grid.values():
        eps = float(eps)
        twirl_cfg = TwirlConfig("pauli", eps * cfg.gate_noise_ratio)
        yield (cfg.sweep_id, "ggep", eps, "depolarizing", channel_sof(depolarizing(1, eps)), cfg.seed)
        for model in ("amplitude_damping", "over_rotation"):
            c = _MODELS[model][0](calibrate_to_ggep(model, eps))
            series = {
                "untwirled": lambda: channel_sof(c),
                "pauli_twirl": lambda: channel_sof(pauli_twirl(c)),
                "imperfect_twirl": lambda: channel_sof(imperfect_twirl(c, twirl_cfg)),
                "clifford_twirl": lambda: channel_sof(clifford_twirl(c)),
            }
            for name, fn in series.items():
                yield (cfg.sweep_id, "ggep", eps, f"{model}/{name}", _sof_or_nan(fn), cfg.seed)


def _fig12(cfg: SweepConfig) -> Iterator[Row]:
    model = ConcatModel(cfg.n_code, cfg.threshold)
    for eps in cfg.grid.values():
        eps = float(eps)
        for l in range(cfg.max_stages):
            try:
                n_l = critical_point(model, eps, l).exact
            except ValueError:
                n_l = math.nan
            yield (cfg.sweep_id, "ggep", eps, f"critical_N{l}", n_l, cfg.seed)
        for n_gates in cfg.gates:
            best = best_scheme(eps, n_gates, cfg.max_stages, model).best
            yield (cfg.sweep_id, "ggep", eps, f"best_l@N={n_gates:g}", float(best), cfg.seed)


def _qedc(cfg: SweepConfig, gates: tuple[str, ...]) -> Iterator[Row]:
    for eps2 in cfg.grid.values():
        eps2 = float(eps2)
        for gate in gates:
            a = qedc_gate_analysis(GATE_CATALOG[gate], eps2 * cfg.gate_noise_ratio, eps2)
            for name in ("gamma_qedc", "gamma_qem_post", "gamma_total", "gamma_pure_qem"):
                yield (cfg.sweep_id, "eps2", eps2, f"{gate}/{name}", getattr(a, name), cfg.seed)


def _scatter(cfg: SweepConfig) -> Iterator[Row]:
    rng = np.random.default_rng(cfg.seed)
    for eps in cfg.grid.values():
        eps = float(eps)
        etas = [random_pauli_eta(rng, eps) for _ in range(cfg.count)]
        gammas = pauli_diagonal_sof_batch(np.array([e.diagonal() for e in etas]))
        yield (cfg.sweep_id, "ggep", eps, "lower_bound", sof_lower_bound(eps), cfg.seed)
        yield (cfg.sweep_id, "ggep", eps, "upper_bound", sof_upper_bound(eps), cfg.seed)
        width = len(str(cfg.count - 1))
        for k, g in enumerate(gammas):
            yield (cfg.sweep_id, "ggep", eps, f"channel_{k:0{width}d}", float(g), cfg.seed)


def sweep_rows(cfg: SweepConfig) -> list[Row]:
    sid = cfg.sweep_id
    if sid == "fig9a":
        rows = _fig9(cfg, 1)
    elif sid == "fig9b":
        rows = _fig9(cfg, 2)
    elif sid == "fig10":
        rows = _fig10(cfg)
    elif sid == "fig12":
        rows = _fig12(cfg)
    elif sid == "fig13":
        rows = _qedc(cfg, ("cnot_transversal",))
    elif sid == "fig14":
        rows = _qedc(cfg, ("swap_h", "cz"))
    else:
        rows = _scatter(cfg)
    return list(rows)


def fmt(x: float | int | str) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))
    return str(x)


def header_line(digest: str) -> str:
    return f"# qemsof {__version__} config={digest}\n"


def render_csv(columns, rows, digest: str) -> str:
    buf = io.StringIO()
    buf.write(header_line(digest))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def run_sweep(cfg: SweepConfig) -> str:
    return render_csv(COLUMNS, sweep_rows(cfg), cfg.digest())
