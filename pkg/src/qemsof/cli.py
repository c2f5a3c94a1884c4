"""Command-line entry point: ``qemsof {sof,sweep,simulate,twirl,coded}``.

Exit codes: 0 success, 2 malformed input, 3 singular or ill-conditioned
channel, 4 QEM plans that do not match the circuit.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

from . import __version__
from .bounds import depolarizing_sof, depolarizing_sof_printed, sof_lower_bound, sof_upper_bound
from .channels import ggep
from .coded import GATE_CATALOG, ConcatModel, best_scheme, critical_point, qedc_gate_analysis
from .descriptors import DescriptorError, channel_from_args, load_json, parse_channel, parse_circuit
from .errors import IllConditioned, PlanMismatch, SingularChannel
from .qem import channel_sof, quasi_probability, standard_basis
from .simulate import BUILTIN_CIRCUITS, simulate
from .sweeps import SWEEP_IDS, SweepConfig, fmt, render_csv, run_sweep
from .twirling import TwirlConfig, imperfect_twirl

EXIT_PARSE = 2
EXIT_SINGULAR = 3
EXIT_PLAN = 4


def _digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _channel(args):
    if args.config:
        return parse_channel(load_json(args.config))
    if not args.kind:
        raise DescriptorError("give a channel KIND with parameters or --config FILE")
    return channel_from_args(args.kind, args.params)


def _safe_upper(eps: float) -> float:
    return sof_upper_bound(eps) if eps < 0.5 else math.inf


def cmd_sof(args) -> int:
    c = _channel(args)
    eps = max(ggep(c), 0.0)
    if c.n <= 2:
        basis = standard_basis(c.n)
        qp = quasi_probability(c, basis)
        norm, gamma, cond = qp.one_norm, qp.sof, basis.condition_number
    else:
        gamma = channel_sof(c)
        norm, cond = math.sqrt(gamma + 1), math.nan
    columns = ["kind", "n", "ggep", "one_norm", "sof", "lower", "upper", "basis_cond"]
    row = [args.kind or "config", c.n, eps, norm, gamma, sof_lower_bound(eps), _safe_upper(eps), cond]
    if args.closed_form:
        columns.append(f"closed_form_{args.closed_form}")
        fn = depolarizing_sof if args.closed_form == "derived" else depolarizing_sof_printed
        row.append(fn(c.n, eps))
    cfg = {"cmd": "sof", "kind": args.kind, "params": args.params, "config": args.config, "closed_form": args.closed_form}
    _emit(render_csv(columns, [row], _digest(cfg)), args.out)
    return 0


def cmd_sweep(args) -> int:
    if args.config:
        d = load_json(args.config)
        if args.sweep_id:
            d["sweep_id"] = args.sweep_id
    else:
        if not args.sweep_id:
            raise DescriptorError("give a sweep id or --config FILE")
        d = {"sweep_id": args.sweep_id}
    grid = dict(d.get("grid", {}))
    for key in ("scale", "min", "max", "points"):
        val = getattr(args, key)
        if val is not None:
            grid[key] = val
    if grid:
        d["grid"] = grid
    if args.seed is not None:
        d["seed"] = args.seed
    if args.count is not None:
        d["count"] = args.count
    cfg = SweepConfig.from_dict(d)
    _emit(run_sweep(cfg), args.out)
    return 0


def cmd_simulate(args) -> int:
    if args.config:
        circuit, plans, observable = parse_circuit(load_json(args.config))
        name = Path(args.config).stem
    else:
        name = args.circuit or "single-gate"
        if name not in BUILTIN_CIRCUITS:
            raise DescriptorError(f"unknown circuit {name!r}; built-ins: {', '.join(BUILTIN_CIRCUITS)}")
        circuit, plans, observable = BUILTIN_CIRCUITS[name]()
    seed = args.seed if args.seed is not None else 0
    s = simulate(circuit, plans, observable, args.shots, seed)
    columns = [
        "circuit", "shots", "seed", "exact", "mean", "std_error", "variance",
        "plain_variance", "variance_ratio", "weight_norm_sq", "gamma_empirical",
    ]
    row = [
        name, s.qem.shots, seed, s.exact, s.qem.mean, s.qem.std_error, s.qem.variance,
        s.plain.variance, s.variance_ratio, s.predicted_ratio, s.gamma_empirical,
    ]
    cfg = {"cmd": "simulate", "circuit": name, "shots": args.shots, "seed": seed}
    _emit(render_csv(columns, [row], _digest(cfg)), args.out)
    return 0


def cmd_twirl(args) -> int:
    c = _channel(args)
    eps = ggep(c)
    g = args.gate_noise if args.gate_noise is not None else eps * args.gate_noise_ratio
    tw = imperfect_twirl(c, TwirlConfig(args.twirl, g))
    columns = ["kind", "twirl", "gate_noise_ggep", "ggep_before", "ggep_after", "sof_before", "sof_after"]
    try:
        before = channel_sof(c)
    except SingularChannel:
        before = math.inf
    row = [args.kind or "config", args.twirl, g, eps, ggep(tw), before, channel_sof(tw)]
    cfg = {"cmd": "twirl", "kind": args.kind, "params": args.params, "config": args.config,
           "twirl": args.twirl, "gate_noise": g}
    _emit(render_csv(columns, [row], _digest(cfg)), args.out)
    return 0


def cmd_coded(args) -> int:
    model = ConcatModel(args.n_code, args.threshold)
    if args.mode == "critical":
        cp = critical_point(model, args.eps, args.stage)
        columns = ["eps", "stage", "critical_n", "critical_n_maclaurin"]
        rows = [[args.eps, args.stage, cp.exact, cp.maclaurin]]
    elif args.mode == "best":
        choice = best_scheme(args.eps, args.gates, args.max_stages, model)
        columns = ["eps", "n_gates", "stage", "log_overhead", "best"]
        rows = [[args.eps, args.gates, l, float(v), int(l == choice.best)] for l, v in enumerate(choice.log_overheads)]
    else:
        spec = GATE_CATALOG[args.gate]
        eps1 = args.eps1 if args.eps1 is not None else args.eps2 / 10
        a = qedc_gate_analysis(spec, eps1, args.eps2, args.residual_coeff, args.p_measure)
        columns = ["gate", "eps1", "eps2", "p_detect", "gamma_qedc", "gamma_qem_post", "gamma_total", "gamma_pure_qem"]
        rows = [[spec.name, eps1, args.eps2, a.p_detect, a.gamma_qedc, a.gamma_qem_post, a.gamma_total, a.gamma_pure_qem]]
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    _emit(render_csv(columns, rows, _digest(cfg)), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON descriptor (channel, sweep or circuit)")
    common.add_argument("--seed", type=int, help="RNG seed (non-negative)")
    common.add_argument("--out", help="write CSV here instead of stdout")

    p = argparse.ArgumentParser(prog="qemsof", description="Sampling overhead of quasi-probability error mitigation")
    p.add_argument("--version", action="version", version=f"qemsof {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sof", parents=[common], help="SOF, 1-norm and bounds of one channel")
    s.add_argument("kind", nargs="?", help="channel kind, e.g. depolarizing")
    s.add_argument("params", nargs="*", help="positional constructor parameters, e.g. 1 0.03")
    s.add_argument("--closed-form", choices=("derived", "printed"), help="append a depolarizing closed-form column")
    s.set_defaults(func=cmd_sof)

    s = sub.add_parser("sweep", parents=[common], help="figure-style CSV sweeps")
    s.add_argument("sweep_id", nargs="?", choices=SWEEP_IDS)
    s.add_argument("--scale", choices=("log", "linear"))
    s.add_argument("--min", type=float)
    s.add_argument("--max", type=float)
    s.add_argument("--points", type=int)
    s.add_argument("--count", type=int, help="random channels per grid point (pauli-scatter)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo QEM run")
    s.add_argument("circuit", nargs="?", help=f"built-in circuit ({', '.join(BUILTIN_CIRCUITS)})")
    s.add_argument("--shots", type=int, default=100_000)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("twirl", parents=[common], help="SOF before and after twirling")
    s.add_argument("kind", nargs="?")
    s.add_argument("params", nargs="*")
    s.add_argument("--twirl", choices=("pauli", "clifford"), default="pauli")
    s.add_argument("--gate-noise", type=float, help="GGEP of each twirl gate")
    s.add_argument("--gate-noise-ratio", type=float, default=0.0, help="twirl-gate GGEP as a fraction of the channel GGEP")
    s.set_defaults(func=cmd_twirl)

    s = sub.add_parser("coded", parents=[common], help="QECC/QEDC overhead analysis")
    s.add_argument("mode", choices=("critical", "best", "qedc"))
    s.add_argument("--eps", type=float, default=1e-4)
    s.add_argument("--stage", type=int, default=0)
    s.add_argument("--gates", type=float, default=1e4)
    s.add_argument("--max-stages", type=int, default=3)
    s.add_argument("--n-code", type=int, default=7)
    s.add_argument("--threshold", type=float, default=1.5e-3)
    s.add_argument("--gate", choices=sorted(GATE_CATALOG), default="cnot_transversal")
    s.add_argument("--eps1", type=float)
    s.add_argument("--eps2", type=float, default=0.01)
    s.add_argument("--residual-coeff", type=float, default=0.5)
    s.add_argument("--p-measure", type=float, default=0.0)
    s.set_defaults(func=cmd_coded)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be non-negative")
    try:
        return args.func(args)
    except PlanMismatch as exc:
        print(f"qemsof: plan mismatch: {exc}", file=sys.stderr)
        return EXIT_PLAN
    except (SingularChannel, IllConditioned) as exc:
        print(f"qemsof: singular channel: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (DescriptorError, ValueError, KeyError, OSError) as exc:
        print(f"qemsof: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "build_parser", "fmt"]
