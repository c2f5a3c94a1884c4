import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from qemsof.bounds import sof_lower_bound, sof_upper_bound
from qemsof.cli import main

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("QEMSOF_REGEN_GOLDEN") == "1"

CASES = {
    "sof_depolarizing": ["sof", "depolarizing", "1", "0.03"],
    "sof_amplitude_damping": ["sof", "amplitude_damping", "0.1"],
    "sof_printed": ["sof", "depolarizing", "1", "0.03", "--closed-form", "printed"],
    "sweep_fig9a": ["sweep", "fig9a"],
    "sweep_fig10": ["sweep", "fig10", "--points", "5"],
    "sweep_fig12": ["sweep", "fig12"],
    "sweep_fig13": ["sweep", "fig13"],
    "sweep_fig14": ["sweep", "fig14"],
    "sweep_scatter": ["sweep", "pauli-scatter", "--count", "5", "--points", "4", "--seed", "9"],
    "twirl_ad": ["twirl", "amplitude_damping", "0.1", "--gate-noise-ratio", "0.1"],
    "coded_critical": ["coded", "critical", "--eps", "1e-4"],
    "coded_best": ["coded", "best", "--eps", "1e-4", "--gates", "1e4"],
    "coded_qedc": ["coded", "qedc", "--gate", "swap_h", "--eps2", "0.01"],
    "simulate_single_gate": ["simulate", "single-gate", "--shots", "20000", "--seed", "3"],
}


def run(argv, capsys):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name, capsys):
    code, out, _ = run(CASES[name], capsys)
    assert code == 0
    path = GOLDEN / f"{name}.csv"
    if REGEN:
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(out)
    assert out == path.read_text()


def test_output_is_byte_stable(capsys, tmp_path):
    argv = ["sweep", "pauli-scatter", "--count", "20", "--points", "3", "--seed", "4"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first == second
    out = tmp_path / "s.csv"
    assert main(argv + ["--out", str(out)]) == 0
    assert out.read_text() == first


def test_header_and_row_count(capsys):
    _, out, _ = run(["sweep", "fig9a", "--points", "7"], capsys)
    assert out.startswith("# qemsof ")
    # lower, upper and three channel models per grid point
    assert len(rows(out)) == 7 * 5


def test_seed_changes_scatter(capsys):
    _, a, _ = run(["sweep", "pauli-scatter", "--count", "3", "--points", "2", "--seed", "1"], capsys)
    _, b, _ = run(["sweep", "pauli-scatter", "--count", "3", "--points", "2", "--seed", "2"], capsys)
    assert a.splitlines()[0] != b.splitlines()[0]
    assert a != b


def test_scatter_sandwich(capsys):
    _, out, _ = run(["sweep", "pauli-scatter", "--count", "50", "--points", "6"], capsys)
    for r in rows(out):
        if r["series"].startswith("channel_"):
            eps, g = float(r["x_value"]), float(r["value"])
            assert sof_lower_bound(eps) - 1e-10 <= g <= sof_upper_bound(eps) + 1e-10


def test_sof_values(capsys):
    _, out, _ = run(["sof", "depolarizing", "1", "0.03", "--closed-form", "derived"], capsys)
    (r,) = rows(out)
    assert float(r["one_norm"]) == pytest.approx(1.0625, abs=1e-12)
    assert float(r["sof"]) == pytest.approx(0.12890625, abs=1e-12)
    assert float(r["closed_form_derived"]) == pytest.approx(0.12890625, abs=1e-12)


def test_sof_three_qubit_uses_reduced_route(capsys):
    code, out, _ = run(["sof", "depolarizing", "3", "0.03"], capsys)
    assert code == 0
    (r,) = rows(out)
    assert r["basis_cond"] == "nan"


def test_descriptor_formats(tmp_path, capsys):
    ptm = {"kind": "ptm", "n": 1, "matrix": [[1, 0, 0, 0], [0, 0.96, 0, 0], [0, 0, 0.96, 0], [0, 0, 0, 0.96]]}
    p = tmp_path / "ptm.json"
    p.write_text(json.dumps(ptm))
    _, out, _ = run(["sof", "--config", str(p)], capsys)
    assert float(rows(out)[0]["sof"]) == pytest.approx(0.12890625, abs=1e-12)

    g = 0.3
    k0 = [[[1, 0], [0, 0]], [[0, 0], [(1 - g) ** 0.5, 0]]]
    k1 = [[[0, 0], [g**0.5, 0]], [[0, 0], [0, 0]]]
    p.write_text(json.dumps({"kind": "kraus", "n": 1, "matrices": [k0, k1]}))
    _, out_k, _ = run(["sof", "--config", str(p)], capsys)
    _, out_a, _ = run(["sof", "amplitude_damping", str(g)], capsys)
    assert float(rows(out_k)[0]["sof"]) == pytest.approx(float(rows(out_a)[0]["sof"]), abs=1e-12)

    tens = {"kind": "tensor", "factors": [{"kind": "depolarizing", "n": 1, "params": {"eps": 0.03}}] * 2}
    p.write_text(json.dumps(tens))
    _, out, _ = run(["sof", "--config", str(p)], capsys)
    assert float(rows(out)[0]["sof"]) == pytest.approx(1.12890625**2 - 1, abs=1e-12)


def test_exit_codes(tmp_path, capsys):
    assert run(["sof", "amplitude_damping", "1.0"], capsys)[0] == 3
    assert run(["sof", "warp_drive", "1"], capsys)[0] == 2
    assert run(["sof", "depolarizing", "1", "2.0"], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["sof", "--config", str(bad)], capsys)[0] == 2
    assert run(["sof", "--config", str(tmp_path / "missing.json")], capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "fig99"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--seed", "-1"])
    assert exc.value.code == 2


def circuit_descriptor(plans):
    dep = {"kind": "depolarizing", "n": 1, "params": {"eps": 0.03}}
    return {
        "n": 1,
        "elements": [
            {"type": "gate", "channel": {"kind": "ry", "params": {"theta": 1.318116071652818}}},
            {"type": "channel", "channel": dep},
            {"type": "qem", "label": "g1"},
        ],
        "observable": [{"weight": 1.0, "pauli": "Z"}],
        "plans": {label: {"invert": dep} for label in plans},
    }


def test_simulate_circuit_file(tmp_path, capsys):
    p = tmp_path / "circ.json"
    p.write_text(json.dumps(circuit_descriptor(["g1"])))
    code, out, _ = run(["simulate", "--config", str(p), "--shots", "20000", "--seed", "1"], capsys)
    assert code == 0
    (r,) = rows(out)
    assert r["circuit"] == "circ"
    assert float(r["exact"]) == pytest.approx(0.25, abs=1e-12)
    assert float(r["weight_norm_sq"]) == pytest.approx(1.12890625)


def test_plan_mismatch_exit_code(tmp_path, capsys):
    p = tmp_path / "circ.json"
    p.write_text(json.dumps(circuit_descriptor([])))
    code, _, err = run(["simulate", "--config", str(p), "--shots", "100"], capsys)
    assert code == 4
    assert "plan" in err
    wide = circuit_descriptor(["g1"])
    wide["plans"]["g1"] = {"invert": {"kind": "depolarizing", "n": 2, "params": {"eps": 0.03}}}
    p.write_text(json.dumps(wide))
    assert run(["simulate", "--config", str(p), "--shots", "100"], capsys)[0] == 4


def test_console_script():
    res = subprocess.run(
        [sys.executable, "-m", "qemsof.cli", "coded", "critical"], capture_output=True, text=True, check=False
    )
    assert res.returncode == 0
    assert "critical_n" in res.stdout
