import json
import math

import numpy as np
import pytest

from cylflow import ConfigurationError
from cylflow.cli import main
from cylflow.config import apply_override, build_config, parse_config
from cylflow.diagnostics import CSV_COLUMNS
from cylflow.grid import Parity, ScalarField, build_grid
from cylflow.io import OutputError, read_csv, read_field, write_csv, write_field, write_outputs
from cylflow.transport import run

MINIMAL = """
nu = 0.01
t_end = 0.05

[grid]
nr = 16
nz = 16
z_len = 1.0

[initial_data]
kind = "gaussian_ring"
amplitude = 5.0
"""


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text(MINIMAL, encoding="utf-8")
    return p


# -- config ------------------------------------------------------------------------

def test_minimal_defaults(cfg_path):
    c = parse_config(cfg_path)
    assert c.sim.cfl == 0.4
    assert c.sim.sample_every == pytest.approx(0.05 / 50)
    assert "cfl" in c.defaults_applied and "sample_every" in c.defaults_applied
    assert c.verify == {"nr": 64, "nz": 64}


def test_override_precedence(cfg_path):
    c = parse_config(cfg_path, ["nu=0.05", "grid.nr=32", "initial_data.width=0.2", "sweep.nu_ladder=[0.1,0.05,0.02]"])
    assert c.sim.nu == 0.05 and c.sim.nr == 32
    assert c.sim.initial_data.resolved()["width"] == 0.2
    assert c.sweep["nu_ladder"] == [0.1, 0.05, 0.02]


@pytest.mark.parametrize("override,key", [
    ("nu=-1", "nu"), ("colour=3", "colour"), ("grid.nr=2", "grid.nr"), ("grid.dr=2", "grid.dr"),
    ("cfl=\"fast\"", "cfl"), ("fit.q=3.0", "fit.q"), ("initial_data.kind=\"x\"", "initial_data.kind"),
])
def test_validation_names_key(cfg_path, override, key):
    with pytest.raises(ConfigurationError) as ei:
        parse_config(cfg_path, [override])
    assert ei.value.key == key


def test_missing_and_malformed(tmp_path):
    with pytest.raises(ConfigurationError) as ei:
        parse_config(tmp_path / "nope.toml")
    assert ei.value.key == "config"
    bad = tmp_path / "bad.toml"
    bad.write_text("nu = = 1", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        parse_config(bad)
    bad.write_text("nu = 0.1\nt_end = 1.0\n[initial_data]\nkind='bessel_mode'\n", encoding="utf-8")
    with pytest.raises(ConfigurationError) as ei:
        parse_config(bad)
    assert ei.value.key == "grid"


def test_override_syntax():
    d = {}
    apply_override(d, "a.b=1")
    apply_override(d, "name=plain")
    assert d == {"a": {"b": 1}, "name": "plain"}
    with pytest.raises(ConfigurationError):
        apply_override(d, "novalue")


def test_resolved_round_trip_and_hash(cfg_path):
    c = parse_config(cfg_path)
    again = build_config(c.resolved())
    assert again.resolved() == c.resolved()
    assert again.hash() == c.hash()
    assert parse_config(cfg_path, ["nu=0.02"]).hash() != c.hash()


# -- files ---------------------------------------------------------------------------

def test_zero_row_csv(tmp_path):
    p = write_csv(tmp_path / "d.csv", [])
    assert p.read_text() == ",".join(CSV_COLUMNS) + "\n"
    assert read_csv(p) == []


def test_csv_round_trip_exact(tmp_path, cfg_path):
    _, rows = run(parse_config(cfg_path).sim)
    back = read_csv(write_csv(tmp_path / "d.csv", rows))
    assert [r.values() for r in back] == [r.values() for r in rows]


def test_field_round_trip_bitwise(tmp_path):
    g = build_grid(12, 10, 2.5)
    f = ScalarField(g, np.random.default_rng(0).standard_normal(g.shape), Parity.EVEN)
    back = read_field(write_field(tmp_path / "f.bin", f))
    assert back.grid == g
    assert back.values.tobytes() == f.values.tobytes()
    raw = (tmp_path / "f.bin").read_bytes()
    assert raw[:8] == b"CYLFLDv1" and len(raw) == 8 + 3 * 8 + 8 + 12 * 10 * 8


def test_field_rejects_garbage(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"NOTAFILE" + bytes(40))
    with pytest.raises(ValueError):
        read_field(p)


def test_two_runs_identical_csv(tmp_path, cfg_path):
    c = parse_config(cfg_path)
    outs = []
    for name in ("a", "b"):
        state, rows = run(c.sim)
        write_outputs(tmp_path / name, "simulate", c, rows=rows, state=state, report={"x": 1.0})
        outs.append(tmp_path / name)
    for f in ("diagnostics.csv", "field.bin", "report.json"):
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    man = json.loads((outs[0] / "manifest.json").read_text())
    assert man["config_hash"] == c.hash() and man["command"] == "simulate"
    assert {e["path"] for e in man["files"]} == {"diagnostics.csv", "field.bin", "report.json"}
    assert "cfl" in man["defaults_applied"]


def test_output_error_lists_partial_files(tmp_path, cfg_path):
    c = parse_config(cfg_path)
    blocker = tmp_path / "blocked"
    blocker.write_text("a file, not a directory")
    with pytest.raises(OutputError) as ei:
        write_outputs(blocker, "simulate", c, rows=[])
    assert ei.value.written == []


# -- command line --------------------------------------------------------------------------

def test_cli_simulate_and_rerun(tmp_path, cfg_path, capsys):
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "diagnostics.csv").exists() and (out / "field.bin").exists()
    out2 = tmp_path / "sim2"
    assert main(["rerun", str(out / "manifest.json"), "--out", str(out2)]) == 0
    assert (out / "diagnostics.csv").read_bytes() == (out2 / "diagnostics.csv").read_bytes()
    # a manifest also works as --config
    out3 = tmp_path / "sim3"
    assert main(["simulate", "--config", str(out / "manifest.json"), "--out", str(out3)]) == 0
    assert (out / "field.bin").read_bytes() == (out3 / "field.bin").read_bytes()


def test_cli_config_error_exit(tmp_path, cfg_path, capsys):
    assert main(["simulate", "--config", str(cfg_path), "--set", "nu=-1", "--out", str(tmp_path)]) == 2
    assert "nu" in capsys.readouterr().err


def test_cli_verify_too_small(tmp_path, cfg_path, capsys):
    assert main(["verify", "--config", str(cfg_path), "--set", "verify.nr=2", "--out", str(tmp_path)]) == 2


def test_cli_verify_passes_and_fault_fails(tmp_path, cfg_path, capsys):
    out = tmp_path / "ok"
    assert main(["verify", "--config", str(cfg_path), "--out", str(out)]) == 0
    table = capsys.readouterr().out
    assert "11/11 checks passed" in table
    bad = tmp_path / "bad"
    assert main(["verify", "--config", str(cfg_path), "--out", str(bad), "--inject-fault", "broken_stencil"]) == 1
    rep = json.loads((bad / "report.json").read_text())
    status = {c["name"]: c["passed"] for c in rep["checks"]}
    assert status["maximum principle"] is False
    assert status["stream solver residual"] is True


def test_cli_fit_and_convergence(tmp_path, cfg_path, capsys):
    sim = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(sim), "--set", "t_end=0.5"]) == 0
    fit = tmp_path / "fit"
    assert main(["fit", "--config", str(cfg_path), "--out", str(fit),
                 "--set", f"fit.csv=\"{sim / 'diagnostics.csv'}\"", "--set", "nu=0.01"]) == 0
    rep = json.loads((fit / "report.json").read_text())
    assert rep["theoretical"] == pytest.approx(-0.25)
    conv = tmp_path / "conv"
    assert main(["convergence", "--config", str(cfg_path), "--out", str(conv),
                 "--set", "convergence.resolutions=[[16,16],[16,16],[32,32]]"]) == 2
    assert main(["convergence", "--config", str(cfg_path), "--out", str(conv),
                 "--set", "convergence.resolutions=[[16,16],[32,32],[64,64]]"]) == 0
    orders = json.loads((conv / "report.json").read_text())["orders"]
    assert orders["stream_manufactured"] >= 1.9 and math.isfinite(orders["bessel_mode"])


def test_cli_sweep_thread_independent(tmp_path, cfg_path, capsys):
    outs = []
    for threads in (1, 2):
        out = tmp_path / f"t{threads}"
        assert main(["sweep", "--config", str(cfg_path), "--out", str(out), "--threads", str(threads),
                     "--set", "sweep.nu_ladder=[0.1,0.05,0.025]"]) == 0
        outs.append(out)
    assert (outs[0] / "report.json").read_bytes() == (outs[1] / "report.json").read_bytes()
    for i in range(3):
        name = f"runs/nu_{i:02d}.csv"
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
